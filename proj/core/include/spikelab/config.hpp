#pragma once

#include <string>
#include <vector>

#include "spikelab/grid.hpp"
#include "spikelab/nonlinearity.hpp"
#include "spikelab/potential.hpp"

namespace spikelab {

// One JSON config drives every pipeline.  validate() enforces the
// cross-module invariants (slope bound, radii ordering, positivity of the
// potential bounds, subcriticality) before any computation runs.
struct RunConfig {
  NonlinearitySpec nonlinearity = NonlinearitySpec::pure_power(3.0);
  TruncationParams truncation;
  PotentialSpec potential;
  std::vector<std::vector<double>> user_E;       // optional, degenerate potentials
  std::vector<double> radius_candidates{0.3, 0.45, 0.6};

  EpsProblem::GridGeometry grid;
  struct Solver {
    double tol = 1e-10;
    int max_iter = 60;
    double ground_state_tol = 1e-6;
  } solver;
  std::vector<double> eps_list{0.2, 0.1, 0.05};
  struct Output {
    std::string dir = "out";
    std::vector<std::string> formats{"csv", "json"};
  } output;

  static RunConfig defaults() { return RunConfig{}; }
  static RunConfig from_json_text(const std::string& text);
  static RunConfig load_file(const std::string& path);

  std::string to_json_text(int indent = 2) const;
  // FNV-1a of the canonical JSON dump; stamped into every manifest.
  std::string hash() const;

  // Throws ConfigError naming the violated rule.
  void validate() const;

  // Truncation with the slope resolved against the potential's lower bound.
  TruncationParams resolved_truncation() const;
};

}  // namespace spikelab

#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "spikelab/grid.hpp"
#include "spikelab/limit_problem.hpp"
#include "spikelab/minmax.hpp"

namespace spikelab {

// Field maximum refined by per-axis quadratic interpolation of the three
// nodes around the argmax.  Coordinates in the rescaled (grid) frame.
std::array<double, 2> spike_center(const GridField& u);

struct GroundStateDistance {
  double distance = 0.0;             // discrete H1 norm of the difference
  std::array<double, 2> center{};    // optimal translate
};

// min over translates y of |u - U(. - y)|_{H1}: 5x5 lattice around the spike
// center, then golden-section refinement per axis.
GroundStateDistance distance_to_ground_states(const GridField& u,
                                              const GroundState& state);

struct UntruncationReport {
  double max_outside = 0.0;            // sup of u outside B1/eps
  std::array<double, 2> arg_outside{}; // where it is attained (grid coords)
  double crossover = 0.0;
  bool passes = false;                 // max_outside < crossover
  // residual fields of the truncated and the plain equation agree bitwise
  bool residual_paths_identical = false;
  double plain_residual_sup = 0.0;
  double truncated_residual_sup = 0.0;
};

// Below the crossover the truncated nonlinearity IS f, so a solution whose
// values outside B1/eps stay under the crossover solves the original
// equation on the grid, with a bit-identical residual.
UntruncationReport untruncation_check(const EpsProblem& p, const GridField& u);

// Normalized local momentum-balance residual over the ball of the given
// radius around a center (grid coordinates):
//   [ 1/2 dV_nu(eps c) int u^2 - dchi_nu(eps c) int (F(u) - Ftilde(u)) ] / scale,
// scale = 1/2 max_{B3} |grad V| int u^2.  Near zero at a genuine
// concentration point; order one for a spike stuck in the cutoff ramp.
double local_identity_residual(const EpsProblem& p, const GridField& u,
                               std::array<double, 2> center_grid, double radius_grid,
                               std::array<double, 2> nu);

struct LambdaFit {
  double C = 0.0;
  double slope = 0.0;
  bool degenerate = false;  // all multipliers at the noise floor
};

// Least squares of log|lambda| against log eps.  Entries are (eps, |lambda|).
LambdaFit lambda_scaling(std::span<const std::array<double, 2>> sweep,
                         double noise_floor = 1e-8);

// One sweep row of the pipeline outputs.
struct SweepRow {
  double eps = 0.0;
  double energy_lower = 0.0;     // constrained saddle energy
  double energy_upper = 0.0;     // cone max
  double m_reference = 0.0;      // radial ground-state level
  double m_grid = 0.0;           // autonomous level measured on this grid
  double lambda_norm = 0.0;
  double barycenter_norm = 0.0;
  double delta_gap = 0.0;          // against the radial level m
  double delta_gap_matched = 0.0;  // against the grid-measured level m_grid
  int degree = 0;
  std::array<double, 2> eps_y{}; // eps * spike center, physical coordinates
  double h1_distance = 0.0;
  double h1_norm_U = 0.0;
  double max_outside_B1 = 0.0;
  bool untruncation_ok = false;
  int grid_n = 0;
  std::string status = "ok";
};

// Aligned plain-text convergence table.
std::string convergence_table(std::span<const SweepRow> rows);

// CSV with the sweep columns (eps, energy_lower, energy_upper, lambda_norm,
// barycenter_norm, delta_gap, degree).
std::string sweep_csv(std::span<const SweepRow> rows);

// CSV with the full diagnostic columns.
std::string convergence_csv(std::span<const SweepRow> rows);

}  // namespace spikelab

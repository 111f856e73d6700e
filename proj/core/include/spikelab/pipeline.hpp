#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spikelab/config.hpp"
#include "spikelab/diagnostics.hpp"
#include "spikelab/minmax.hpp"

namespace spikelab::pipeline {

// Per-config shared state: potential classification, the limit-problem ground
// state at k = 1, and its mountain-pass curve.
struct Baseline {
  CriticalPointClass cpc;
  GroundState state;
  MPCurve curve;
};

Baseline prepare(const RunConfig& cfg);

struct SpikeOutcome {
  SweepRow row;
  std::optional<SaddleResult> saddle;
  int exit_code = 0;  // 0 ok, 3 boundary gap not positive, 4 saddle divergence
};

// Full pipeline at one eps: cone scan, boundary gap, matched autonomous
// baseline, constrained saddle, degree, diagnostics.
SpikeOutcome run_spike(const RunConfig& cfg, const Baseline& base, double eps);

// Parallel over eps_list (worker pool capped by SPIKELAB_THREADS); rows come
// back in eps_list order regardless of scheduling.
std::vector<SpikeOutcome> run_sweep(const RunConfig& cfg, const Baseline& base);

struct DegreeOutcome {
  double t0 = 0.0;
  double delta = 0.0;
  std::vector<DegreeResult> results;  // one per tested t
  int exit_code = 0;
};

DegreeOutcome run_degree(const RunConfig& cfg, const Baseline& base, double eps,
                         int nt = 5);

struct GroundStateOutcome {
  GroundState state;
  double k = 1.0;
  int dim = 2;
  std::string summary_json;
  std::string profile_csv;
};

GroundStateOutcome run_ground_state(const RunConfig& cfg, double k, int dim);

// (k, m_k) table as CSV over a uniform k grid.
std::string run_mcurve_csv(const RunConfig& cfg, double k_lo, double k_hi, int n,
                           int dim);

struct CheckItem {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::vector<CheckItem> truncation_checks(const RunConfig& cfg, int n_samples = 10000);
std::vector<CheckItem> potential_checks(const RunConfig& cfg);

std::string checks_json(const std::vector<CheckItem>& items);
std::string row_json(const SweepRow& row);
std::string rows_json(std::span<const SweepRow> rows);
std::vector<SweepRow> rows_from_json_text(const std::string& text);

int worker_count(std::size_t n_jobs);

// Writes outputs under cfg.output.dir and a manifest.json recording the
// command, the config hash and every emitted file.
class OutputWriter {
public:
  OutputWriter(const RunConfig& cfg, std::string command);
  const std::string& dir() const { return dir_; }
  std::string write_text(const std::string& name, const std::string& content);
  void note_file(const std::string& path);  // for files written elsewhere
  void finish();

private:
  std::string dir_;
  std::string command_;
  std::string config_hash_;
  std::string config_text_;
  std::vector<std::string> files_;
};

}  // namespace spikelab::pipeline

// spikelab: semiclassical spike pipelines on the command line.
//
// Commands: ground-state, mcurve, truncation-check, potential-check, spike,
// sweep, degree, report.  One JSON config drives everything; flags override
// the common knobs.  Exit codes: 0 ok, 1 config error, 2 solver/check
// failure, 3 boundary gap not positive, 4 saddle divergence.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "spikelab/errors.hpp"
#include "spikelab/pipeline.hpp"

using namespace spikelab;

namespace {

std::string eps_tag(double eps) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", eps);
  return buf;
}

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  int grid_n = 0;
  double h_target = -1.0;
  double tol = 0.0;

  RunConfig load() const {
    RunConfig cfg = config_path.empty() ? RunConfig::defaults()
                                        : RunConfig::load_file(config_path);
    if (!out_dir.empty()) cfg.output.dir = out_dir;
    if (grid_n > 0) cfg.grid.n = grid_n;
    if (h_target >= 0.0) cfg.grid.h_target = h_target;
    if (tol > 0.0) cfg.solver.tol = tol;
    cfg.validate();
    return cfg;
  }
};

void attach_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON config file");
  cmd->add_option("--out", flags.out_dir, "output directory override");
  cmd->add_option("--n", flags.grid_n, "grid points per dimension override");
  cmd->add_option("--h-target", flags.h_target,
                  "target grid spacing (overrides --n when positive)");
  cmd->add_option("--tol", flags.tol, "solver tolerance override");
}

bool parse_range(const std::string& text, double& lo, double& hi, int& n) {
  char colon1 = 0, colon2 = 0;
  std::istringstream is(text);
  if (!(is >> lo >> colon1 >> hi >> colon2 >> n)) return false;
  return colon1 == ':' && colon2 == ':';
}

int cmd_ground_state(const CommonFlags& flags, double k, int dim,
                     const std::string& mcurve_range) {
  RunConfig cfg = flags.load();
  pipeline::OutputWriter out(cfg, "ground-state");
  if (!mcurve_range.empty()) {
    double lo, hi;
    int n;
    if (!parse_range(mcurve_range, lo, hi, n))
      throw ConfigError("--mcurve expects lo:hi:n");
    out.write_text("mcurve.csv", pipeline::run_mcurve_csv(cfg, lo, hi, n, dim));
    out.finish();
    std::cout << "wrote " << out.dir() << "/mcurve.csv\n";
    return 0;
  }
  auto res = pipeline::run_ground_state(cfg, k, dim);
  out.write_text("ground_state.json", res.summary_json);
  out.write_text("ground_state_profile.csv", res.profile_csv);
  out.finish();
  std::cout << res.summary_json;
  return 0;
}

int cmd_mcurve(const CommonFlags& flags, const std::string& range, int dim) {
  RunConfig cfg = flags.load();
  double lo, hi;
  int n;
  if (!parse_range(range, lo, hi, n)) throw ConfigError("--range expects lo:hi:n");
  std::string csv = pipeline::run_mcurve_csv(cfg, lo, hi, n, dim);
  pipeline::OutputWriter out(cfg, "mcurve");
  out.write_text("mcurve.csv", csv);
  out.finish();
  std::cout << csv;
  return 0;
}

int run_checks(const CommonFlags& flags, bool truncation) {
  RunConfig cfg = flags.load();
  auto items = truncation ? pipeline::truncation_checks(cfg)
                          : pipeline::potential_checks(cfg);
  std::string name = truncation ? "truncation_check.json" : "potential_check.json";
  pipeline::OutputWriter out(cfg, truncation ? "truncation-check" : "potential-check");
  out.write_text(name, pipeline::checks_json(items));
  out.finish();
  bool all = true;
  for (const auto& it : items) {
    std::cout << (it.pass ? "[pass] " : "[FAIL] ") << it.name << ": " << it.detail
              << "\n";
    all = all && it.pass;
  }
  return all ? 0 : 2;
}

int cmd_spike(const CommonFlags& flags, double eps) {
  RunConfig cfg = flags.load();
  auto base = pipeline::prepare(cfg);
  auto outcome = pipeline::run_spike(cfg, base, eps);
  pipeline::OutputWriter out(cfg, "spike");
  std::string tag = eps_tag(eps);
  out.write_text("spike_eps" + tag + ".json", pipeline::row_json(outcome.row));
  if (outcome.saddle) {
    std::string base_name = out.dir() + "/u_eps" + tag;
    write_field(base_name, outcome.saddle->u, eps, "constrained saddle solution");
    out.note_file("u_eps" + tag + ".f64");
    out.note_file("u_eps" + tag + ".json");
    write_center_slice_csv(out.dir() + "/slice_eps" + tag + ".csv", outcome.saddle->u);
    out.note_file("slice_eps" + tag + ".csv");
  }
  out.finish();
  std::cout << pipeline::row_json(outcome.row);
  return outcome.exit_code;
}

int cmd_sweep(const CommonFlags& flags, const std::string& eps_list_csv) {
  RunConfig cfg = flags.load();
  if (!eps_list_csv.empty()) {
    cfg.eps_list.clear();
    std::istringstream is(eps_list_csv);
    std::string tok;
    while (std::getline(is, tok, ',')) cfg.eps_list.push_back(std::stod(tok));
    cfg.validate();
  }
  auto base = pipeline::prepare(cfg);
  auto outcomes = pipeline::run_sweep(cfg, base);
  std::vector<SweepRow> rows;
  int code = 0;
  for (const auto& oc : outcomes) {
    rows.push_back(oc.row);
    code = std::max(code, oc.exit_code);
  }
  pipeline::OutputWriter out(cfg, "sweep");
  out.write_text("rows.json", pipeline::rows_json(rows));
  out.write_text("sweep.csv", sweep_csv(rows));
  out.write_text("convergence.csv", convergence_csv(rows));
  out.write_text("convergence.txt", convergence_table(rows));
  out.finish();
  std::cout << convergence_table(rows);
  return code;
}

int cmd_degree(const CommonFlags& flags, double eps, int nt) {
  RunConfig cfg = flags.load();
  auto base = pipeline::prepare(cfg);
  auto res = pipeline::run_degree(cfg, base, eps, nt);
  pipeline::OutputWriter out(cfg, "degree");
  std::ostringstream trace;
  trace << "t,xi_1,xi_2,psi_1,psi_2\n";
  trace.precision(17);
  bool all_one = !res.results.empty();
  std::ostringstream report;
  report << "{\n  \"eps\": " << eps << ",\n  \"t0\": " << res.t0
         << ",\n  \"delta_gap\": " << res.delta << ",\n  \"degrees\": [";
  for (std::size_t i = 0; i < res.results.size(); ++i) {
    const auto& d = res.results[i];
    report << (i ? ", " : "") << d.degree;
    all_one = all_one && d.degree == 1;
    for (const auto& row : d.trace)
      trace << d.t << "," << row[0] << "," << row[1] << "," << row[2] << ","
            << row[3] << "\n";
  }
  report << "]\n}\n";
  std::string tag = eps_tag(eps);
  out.write_text("degree_eps" + tag + ".json", report.str());
  out.write_text("degree_trace_eps" + tag + ".csv", trace.str());
  out.finish();
  std::cout << report.str();
  if (res.exit_code != 0) return res.exit_code;
  return all_one ? 0 : 2;
}

int cmd_report(const CommonFlags& flags, const std::string& dir_flag) {
  RunConfig cfg = flags.load();
  std::string dir = dir_flag.empty() ? cfg.output.dir : dir_flag;
  std::ifstream in(dir + "/rows.json");
  if (!in) throw ConfigError("report: cannot open " + dir + "/rows.json (run sweep first)");
  std::stringstream ss;
  ss << in.rdbuf();
  auto rows = pipeline::rows_from_json_text(ss.str());
  std::string table = convergence_table(rows);
  std::ofstream txt(dir + "/convergence.txt");
  txt << table;
  std::cout << table;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spikelab: variational solver for semiclassical spikes of "
               "-eps^2 Lap u + V(x) u = f(u)"};
  app.require_subcommand(1);

  CommonFlags flags;

  auto* gs = app.add_subcommand("ground-state", "solve the limit problem and report identities");
  attach_common(gs, flags);
  double k = 1.0;
  int dim = 2;
  std::string gs_mcurve;
  gs->add_option("--k", k, "zero-order coefficient of the limit problem");
  gs->add_option("--dim", dim, "space dimension of the radial solver");
  gs->add_option("--mcurve", gs_mcurve, "emit a (k, m_k) table instead: lo:hi:n");

  auto* mc = app.add_subcommand("mcurve", "tabulate k -> m_k");
  attach_common(mc, flags);
  std::string mc_range = "0.5:2:8";
  int mc_dim = 2;
  mc->add_option("--range", mc_range, "k grid as lo:hi:n");
  mc->add_option("--dim", mc_dim, "space dimension");

  auto* tc = app.add_subcommand("truncation-check", "run the truncation property suite");
  attach_common(tc, flags);
  auto* pc = app.add_subcommand("potential-check", "run the potential property suite");
  attach_common(pc, flags);

  auto* sp = app.add_subcommand("spike", "full pipeline at one eps");
  attach_common(sp, flags);
  double sp_eps = 0.1;
  sp->add_option("--eps", sp_eps, "semiclassical parameter")->required();

  auto* sw = app.add_subcommand("sweep", "pipeline over the configured eps list");
  attach_common(sw, flags);
  std::string sw_eps_list;
  sw->add_option("--eps-list", sw_eps_list, "comma-separated eps values");

  auto* dg = app.add_subcommand("degree", "winding/degree check of the barycenter map");
  attach_common(dg, flags);
  double dg_eps = 0.1;
  int dg_nt = 5;
  dg->add_option("--eps", dg_eps, "semiclassical parameter")->required();
  dg->add_option("--nt", dg_nt, "number of tested curve parameters");

  auto* rp = app.add_subcommand("report", "re-render the convergence table from a sweep directory");
  attach_common(rp, flags);
  std::string rp_dir;
  rp->add_option("--dir", rp_dir, "sweep output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gs->parsed()) return cmd_ground_state(flags, k, dim, gs_mcurve);
    if (mc->parsed()) return cmd_mcurve(flags, mc_range, mc_dim);
    if (tc->parsed()) return run_checks(flags, true);
    if (pc->parsed()) return run_checks(flags, false);
    if (sp->parsed()) return cmd_spike(flags, sp_eps);
    if (sw->parsed()) return cmd_sweep(flags, sw_eps_list);
    if (dg->parsed()) return cmd_degree(flags, dg_eps, dg_nt);
    if (rp->parsed()) return cmd_report(flags, rp_dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

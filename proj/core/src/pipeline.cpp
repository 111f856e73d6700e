#include "spikelab/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "spikelab/errors.hpp"

namespace spikelab::pipeline {

using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ClassifyOptions classify_options(const RunConfig& cfg) {
  ClassifyOptions o;
  o.user_E = cfg.user_E;
  return o;
}

}  // namespace

Baseline prepare(const RunConfig& cfg) {
  cfg.validate();
  Baseline base;
  base.cpc = classify_critical_point(cfg.potential, classify_options(cfg));
  base.state = solve_ground_state(1.0, cfg.nonlinearity, 2,
                                  cfg.solver.ground_state_tol);
  base.curve = build_mp_curve(base.state, cfg.nonlinearity);
  return base;
}

SpikeOutcome run_spike(const RunConfig& cfg, const Baseline& base, double eps) {
  SpikeOutcome out;
  SweepRow& row = out.row;
  row.eps = eps;
  row.m_reference = base.state.energy;

  TruncationParams trunc = cfg.resolved_truncation();
  EpsProblem p(eps, cfg.nonlinearity, trunc, cfg.potential, base.cpc, cfg.grid);
  row.grid_n = p.n();
  ConeSampler sampler(base.curve, base.state, trunc.radii[0] / eps, p.dim_E());

  ConeScanResult scan = cone_max_energy(p, sampler);
  row.energy_upper = scan.max_energy;

  BoundaryGapResult gap = boundary_gap(p, sampler);
  row.delta_gap = gap.delta;

  // autonomous level on the same grid, for matched-resolution columns
  EpsProblem auto_p = EpsProblem::autonomous(1.0, eps, cfg.nonlinearity, trunc,
                                             base.cpc, cfg.grid);
  GridField auto_seed =
      interpolate_radial(base.state.profile, p.n(), p.L(), {0.0, 0.0});
  GridField auto_u = newton_solve(auto_p, auto_seed, cfg.solver.tol, cfg.solver.max_iter);
  row.m_grid = energy(auto_p, auto_u);
  row.delta_gap_matched =
      row.m_grid - std::max(gap.max_side_energy, gap.max_top_energy);

  row.h1_norm_U = h1_norm(
      interpolate_radial(base.state.profile, p.n(), p.L(), {0.0, 0.0}));

  if (!(gap.delta > 0.0)) {
    row.status = "boundary gap not positive";
    out.exit_code = 3;
    return out;
  }

  GridField seed = cone_element(p, sampler, scan.t_arg, scan.xi_arg);
  SaddleResult saddle;
  try {
    saddle = constrained_saddle(p, seed, cfg.solver.tol, cfg.solver.max_iter,
                                0.25 * base.state.energy);
  } catch (const SolverError& e) {
    row.status = std::string("saddle failed: ") + e.what();
    out.exit_code = 4;
    return out;
  }
  row.energy_lower = saddle.energy;
  row.barycenter_norm = saddle.barycenter_norm;
  double ln = 0.0;
  for (double l : saddle.lambda) ln += l * l;
  row.lambda_norm = std::sqrt(ln);

  DegreeResult deg = degree_check(p, sampler, base.curve.t_peak,
                                  p.dim_E() == 1 ? 2 : 64);
  row.degree = deg.degree;

  auto center = spike_center(saddle.u);
  row.eps_y = {eps * center[0], eps * center[1]};
  row.h1_distance = distance_to_ground_states(saddle.u, base.state).distance;

  UntruncationReport un = untruncation_check(p, saddle.u);
  row.max_outside_B1 = un.max_outside;
  row.untruncation_ok = un.passes;

  out.saddle = std::move(saddle);
  return out;
}

int worker_count(std::size_t n_jobs) {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  unsigned cap = hw;
  if (const char* env = std::getenv("SPIKELAB_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1) cap = static_cast<unsigned>(v);
  }
  return static_cast<int>(std::min<std::size_t>(n_jobs, std::min(hw, cap)));
}

std::vector<SpikeOutcome> run_sweep(const RunConfig& cfg, const Baseline& base) {
  const auto& eps_list = cfg.eps_list;
  std::vector<SpikeOutcome> out(eps_list.size());
  std::atomic<std::size_t> next{0};
  int nw = worker_count(eps_list.size());
  auto work = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= eps_list.size()) return;
      try {
        out[i] = run_spike(cfg, base, eps_list[i]);
      } catch (const std::exception& e) {
        out[i].row.eps = eps_list[i];
        out[i].row.status = std::string("failed: ") + e.what();
        out[i].exit_code = 4;
      }
    }
  };
  if (nw <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < nw; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return out;
}

DegreeOutcome run_degree(const RunConfig& cfg, const Baseline& base, double eps,
                         int nt) {
  DegreeOutcome out;
  TruncationParams trunc = cfg.resolved_truncation();
  EpsProblem p(eps, cfg.nonlinearity, trunc, cfg.potential, base.cpc, cfg.grid);
  ConeSampler sampler(base.curve, base.state, trunc.radii[0] / eps, p.dim_E());

  BoundaryGapResult gap = boundary_gap(p, sampler);
  out.delta = gap.delta;
  if (!(gap.delta > 0.0)) {
    out.exit_code = 3;
    return out;
  }
  out.t0 = std::max(base.curve.t_peak - 0.2, 0.05);
  for (int i = 0; i < nt; ++i) {
    double t = out.t0 + (1.0 - out.t0) * i / (nt - 1);
    out.results.push_back(degree_check(p, sampler, t, 256));
  }
  return out;
}

GroundStateOutcome run_ground_state(const RunConfig& cfg, double k, int dim) {
  GroundStateOutcome out;
  out.k = k;
  out.dim = dim;
  out.state = solve_ground_state(k, cfg.nonlinearity, dim, cfg.solver.ground_state_tol);
  const GroundState& s = out.state;

  json j{{"k", k},
         {"dim", dim},
         {"m", s.energy},
         {"grad_norm_sq", s.grad_norm_sq},
         {"l2_norm_sq", s.l2_norm_sq},
         {"F_integral", s.F_integral},
         {"decay_rate", s.decay_rate},
         {"U0", s.u0},
         {"pohozaev_residual", pohozaev_residual(s)},
         {"nehari_residual", nehari_residual(s)}};
  out.summary_json = j.dump(2) + "\n";

  std::ostringstream csv;
  csv << "r,U\n";
  double d = s.profile.dr();
  for (int i = 0; i < s.profile.n_points; ++i)
    csv << fmt(d * i) << "," << fmt(s.profile.values[i]) << "\n";
  out.profile_csv = csv.str();
  return out;
}

std::string run_mcurve_csv(const RunConfig& cfg, double k_lo, double k_hi, int n,
                           int dim) {
  if (!(k_lo > 0.0) || !(k_hi > k_lo) || n < 2)
    throw ConfigError("mcurve: need 0 < k_lo < k_hi and n >= 2");
  std::vector<double> ks(n);
  for (int i = 0; i < n; ++i) ks[i] = k_lo + (k_hi - k_lo) * i / (n - 1);
  auto table = m_curve(ks, cfg.nonlinearity, dim, cfg.solver.ground_state_tol);
  std::ostringstream csv;
  csv << "k,m_k\n";
  for (const auto& [k, m] : table) csv << fmt(k) << "," << fmt(m) << "\n";
  return csv.str();
}

std::vector<CheckItem> truncation_checks(const RunConfig& cfg, int n_samples) {
  std::vector<CheckItem> items;
  const auto& nl = cfg.nonlinearity;
  TruncationParams trunc = cfg.resolved_truncation();
  double a = trunc.slope(nl.mu);
  TruncatedNonlinearity tn(nl, a);
  std::mt19937_64 rng(20240511ULL);
  std::uniform_real_distribution<double> logs(std::log(1e-6), std::log(1e3));

  auto add = [&](const std::string& name, bool pass, const std::string& detail) {
    items.push_back({name, pass, detail});
  };

  {
    std::string fail = check_hypotheses(nl, cfg.potential.dim, n_samples);
    add("hypotheses", fail.empty(), fail.empty() ? "superlinearity and growth confirmed" : fail);
  }
  {
    bool ok = true;
    std::string detail = "ftilde <= min(f, a s) on samples";
    for (int i = 0; i < n_samples && ok; ++i) {
      double s = std::exp(logs(rng));
      double ft = tn.ftilde(s);
      if (ft > nl.f(s) || ft > a * s) {
        ok = false;
        detail = "violated at s = " + fmt(s);
      }
    }
    if (tn.ftilde(-1.0) != 0.0) { ok = false; detail = "nonzero for s < 0"; }
    add("ftilde_bounds", ok, detail);
  }
  {
    bool ok = true;
    std::string detail = "Ftilde <= min(a s^2 / 2, F) on samples";
    for (int i = 0; i < n_samples && ok; ++i) {
      double s = std::exp(logs(rng));
      double Ft = tn.Ftilde(s);
      if (Ft > 0.5 * a * s * s * (1 + 1e-14) || Ft > nl.F(s) * (1 + 1e-14)) {
        ok = false;
        detail = "violated at s = " + fmt(s);
      }
    }
    add("Ftilde_bound", ok, detail);
  }
  {
    double r = tn.crossover();
    bool ok;
    std::string detail;
    if (nl.exponents.size() == 1) {
      double expect = std::pow(a / nl.coefficients[0], 1.0 / (nl.exponents[0] - 1.0));
      ok = r == expect;
      detail = "closed form r = " + fmt(r);
    } else {
      double res = std::abs(nl.f(r) - a * r);
      ok = res < 1e-12 * a * r;
      detail = "bisection residual " + fmt(res);
    }
    add("crossover", ok, detail);
  }
  {
    bool ok = true;
    std::string detail = "g matches f inside B1 and below the crossover, ftilde outside B2";
    std::uniform_real_distribution<double> uni(0.0, 1.5 * trunc.radii[4]);
    for (int i = 0; i < n_samples && ok; ++i) {
      double s = std::exp(logs(rng));
      double rho = uni(rng);
      double x[2] = {rho, 0.0};
      double g = g_eval(nl, trunc, std::span<const double>(x, 2), s);
      if (rho <= trunc.radii[1] && g != nl.f(s)) { ok = false; detail = "f branch violated inside B1"; }
      if (s <= tn.crossover() && g != nl.f(s)) { ok = false; detail = "f branch violated below crossover"; }
      if (rho >= trunc.radii[2] && g != tn.ftilde(s)) { ok = false; detail = "ftilde branch violated outside B2"; }
      double g_in = g_eval(nl, trunc, std::span<const double>(x, 2), s);
      double x_out[2] = {rho * 1.1, 0.0};
      double g_out = g_eval(nl, trunc, std::span<const double>(x_out, 2), s);
      if (g_out > g_in * (1 + 1e-14) + 1e-300) { ok = false; detail = "g not monotone in |x|"; }
    }
    add("g_interpolation", ok, detail);
  }
  {
    bool ok = true;
    double lip = 1.0 / (trunc.radii[2] - trunc.radii[1]);
    std::uniform_real_distribution<double> uni(0.0, 1.5 * trunc.radii[4]);
    for (int i = 0; i < n_samples && ok; ++i) {
      double r1 = uni(rng), r2 = uni(rng);
      if (r1 == r2) continue;
      double q = std::abs(chi_radial(trunc, r1) - chi_radial(trunc, r2)) / std::abs(r1 - r2);
      if (q > lip * (1 + 1e-9)) ok = false;
    }
    add("chi_lipschitz", ok, "difference quotients within 1/(R2-R1) = " + fmt(lip));
  }
  {
    double delta = 0.1;
    GrowthBound gb = growth_bound_check(nl, delta);
    bool ok = true;
    for (int i = 0; i < n_samples && ok; ++i) {
      double s = std::exp(std::log(1e-6) + (std::log(1e3) - std::log(1e-6)) * i / (n_samples - 1));
      if (nl.f(s) > delta * s + gb.c_delta * std::pow(s, nl.p) * (1 + 1e-12)) ok = false;
    }
    add("growth_bound", ok, "C_delta = " + fmt(gb.c_delta) + " at delta = " + fmt(delta));
  }
  return items;
}

std::vector<CheckItem> potential_checks(const RunConfig& cfg) {
  std::vector<CheckItem> items;
  const auto& pot = cfg.potential;
  auto add = [&](const std::string& name, bool pass, const std::string& detail) {
    items.push_back({name, pass, detail});
  };

  {
    BoundsReport rep = check_V0(pot, 4.0, 241);
    std::ostringstream os;
    os << "observed [" << rep.observed_min << ", " << rep.observed_max
       << "] within [" << pot.alpha1() << ", " << pot.alpha2() << "]";
    if (!rep.ok && !rep.violating_point.empty())
      os << "; violation at (" << rep.violating_point[0] << ", "
         << rep.violating_point[1] << ")";
    add("V0_bounds", rep.ok && rep.observed_min > 0.0, os.str());
  }
  {
    std::vector<double> origin(pot.dim, 0.0);
    auto g = pot.gradient(origin);
    bool ok = true;
    for (double gi : g) ok = ok && gi == 0.0;
    add("gradient_at_zero", ok, "exact zero gradient at the critical point");
  }
  {
    try {
      auto cpc = classify_critical_point(pot, classify_options(cfg));
      std::ostringstream os;
      os << "case " << cpc.tag_name() << ", dim E = " << cpc.dim_E();
      add("critical_point_class", true, os.str());
    } catch (const std::exception& e) {
      add("critical_point_class", false, e.what());
    }
  }
  {
    std::vector<double> cands = cfg.radius_candidates;
    if (std::find(cands.begin(), cands.end(), cfg.truncation.radii[1]) == cands.end())
      cands.push_back(cfg.truncation.radii[1]);
    RadiusSelection sel = select_radius_R1(pot, cands);
    std::ostringstream os;
    if (sel.found) {
      os << "accepted R1 = " << sel.radius;
    } else {
      os << "all candidates rejected";
      for (const auto& r : sel.rejected)
        os << "; R = " << r.radius << " near-violating angle " << r.angle
           << " (tangential " << r.tangential << ")";
    }
    add("radius_selection", sel.found, os.str());
  }
  return items;
}

std::string checks_json(const std::vector<CheckItem>& items) {
  json j = json::array();
  for (const auto& it : items)
    j.push_back({{"name", it.name}, {"pass", it.pass}, {"detail", it.detail}});
  bool all = std::all_of(items.begin(), items.end(),
                         [](const CheckItem& c) { return c.pass; });
  json out{{"all_pass", all}, {"checks", j}};
  return out.dump(2) + "\n";
}

namespace {

json row_to_json_obj(const SweepRow& r) {
  return json{{"eps", r.eps},
              {"grid_n", r.grid_n},
              {"energy_lower", r.energy_lower},
              {"energy_upper", r.energy_upper},
              {"m_reference", r.m_reference},
              {"m_grid", r.m_grid},
              {"lambda_norm", r.lambda_norm},
              {"barycenter_norm", r.barycenter_norm},
              {"delta_gap", r.delta_gap},
              {"delta_gap_matched", r.delta_gap_matched},
              {"degree", r.degree},
              {"eps_y", {r.eps_y[0], r.eps_y[1]}},
              {"h1_distance", r.h1_distance},
              {"h1_norm_U", r.h1_norm_U},
              {"max_outside_B1", r.max_outside_B1},
              {"untruncation_ok", r.untruncation_ok},
              {"status", r.status}};
}

SweepRow row_from_json_obj(const json& j) {
  SweepRow r;
  r.eps = j.value("eps", 0.0);
  r.grid_n = j.value("grid_n", 0);
  r.energy_lower = j.value("energy_lower", 0.0);
  r.energy_upper = j.value("energy_upper", 0.0);
  r.m_reference = j.value("m_reference", 0.0);
  r.m_grid = j.value("m_grid", 0.0);
  r.lambda_norm = j.value("lambda_norm", 0.0);
  r.barycenter_norm = j.value("barycenter_norm", 0.0);
  r.delta_gap = j.value("delta_gap", 0.0);
  r.delta_gap_matched = j.value("delta_gap_matched", 0.0);
  r.degree = j.value("degree", 0);
  if (j.contains("eps_y")) {
    r.eps_y[0] = j.at("eps_y")[0].get<double>();
    r.eps_y[1] = j.at("eps_y")[1].get<double>();
  }
  r.h1_distance = j.value("h1_distance", 0.0);
  r.h1_norm_U = j.value("h1_norm_U", 0.0);
  r.max_outside_B1 = j.value("max_outside_B1", 0.0);
  r.untruncation_ok = j.value("untruncation_ok", false);
  r.status = j.value("status", "ok");
  return r;
}

}  // namespace

std::string rows_json(std::span<const SweepRow> rows) {
  json arr = json::array();
  for (const auto& r : rows) arr.push_back(row_to_json_obj(r));
  return arr.dump(2) + "\n";
}

std::vector<SweepRow> rows_from_json_text(const std::string& text) {
  json arr;
  try {
    arr = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("rows: JSON parse error: ") + e.what());
  }
  std::vector<SweepRow> rows;
  for (const auto& j : arr) rows.push_back(row_from_json_obj(j));
  return rows;
}

std::string row_json(const SweepRow& r) {
  json j{{"eps", r.eps},
         {"grid_n", r.grid_n},
         {"energy_lower", r.energy_lower},
         {"energy_upper", r.energy_upper},
         {"m_reference", r.m_reference},
         {"m_grid", r.m_grid},
         {"lambda_norm", r.lambda_norm},
         {"barycenter_norm", r.barycenter_norm},
         {"delta_gap", r.delta_gap},
         {"delta_gap_matched", r.delta_gap_matched},
         {"degree", r.degree},
         {"eps_y", {r.eps_y[0], r.eps_y[1]}},
         {"h1_distance", r.h1_distance},
         {"h1_norm_U", r.h1_norm_U},
         {"max_outside_B1", r.max_outside_B1},
         {"untruncation_ok", r.untruncation_ok},
         {"status", r.status}};
  return j.dump(2) + "\n";
}

OutputWriter::OutputWriter(const RunConfig& cfg, std::string command)
    : dir_(cfg.output.dir),
      command_(std::move(command)),
      config_hash_(cfg.hash()),
      config_text_(cfg.to_json_text()) {
  std::filesystem::create_directories(dir_);
}

std::string OutputWriter::write_text(const std::string& name,
                                     const std::string& content) {
  std::string path = dir_ + "/" + name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  out << content;
  files_.push_back(name);
  return path;
}

void OutputWriter::note_file(const std::string& path) { files_.push_back(path); }

void OutputWriter::finish() {
  json j{{"tool", "spikelab"},
         {"version", "0.1.0"},
         {"command", command_},
         {"config_hash", config_hash_},
         {"config", json::parse(config_text_)},
         {"files", files_}};
  std::ofstream out(dir_ + "/manifest.json");
  if (!out) throw ConfigError("cannot write manifest.json");
  out << j.dump(2) << "\n";
}

}  // namespace spikelab::pipeline

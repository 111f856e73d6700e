#include "spikelab/limit_problem.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "spikelab/errors.hpp"

namespace spikelab {

namespace {

// Dormand-Prince 5(4) step for y' = rhs(r, y), y = (U, U').
struct Dp54 {
  template <typename Rhs>
  static bool step(const Rhs& rhs, double r, std::array<double, 2>& y, double& h,
                   double rel_tol, double abs_tol) {
    const std::array<double, 2> y0 = y;
    std::array<double, 2> k1 = rhs(r, y0), k2{}, k3{}, k4{}, k5{}, k6{}, k7{};
    auto at = [&](double c, const std::array<double, 2>& incr) {
      std::array<double, 2> ya{y0[0] + h * incr[0], y0[1] + h * incr[1]};
      return rhs(r + c * h, ya);
    };
    k2 = at(1.0 / 5, {k1[0] / 5, k1[1] / 5});
    k3 = at(3.0 / 10, {3.0 / 40 * k1[0] + 9.0 / 40 * k2[0],
                       3.0 / 40 * k1[1] + 9.0 / 40 * k2[1]});
    k4 = at(4.0 / 5, {44.0 / 45 * k1[0] - 56.0 / 15 * k2[0] + 32.0 / 9 * k3[0],
                      44.0 / 45 * k1[1] - 56.0 / 15 * k2[1] + 32.0 / 9 * k3[1]});
    k5 = at(8.0 / 9,
            {19372.0 / 6561 * k1[0] - 25360.0 / 2187 * k2[0] + 64448.0 / 6561 * k3[0] -
                 212.0 / 729 * k4[0],
             19372.0 / 6561 * k1[1] - 25360.0 / 2187 * k2[1] + 64448.0 / 6561 * k3[1] -
                 212.0 / 729 * k4[1]});
    k6 = at(1.0,
            {9017.0 / 3168 * k1[0] - 355.0 / 33 * k2[0] + 46732.0 / 5247 * k3[0] +
                 49.0 / 176 * k4[0] - 5103.0 / 18656 * k5[0],
             9017.0 / 3168 * k1[1] - 355.0 / 33 * k2[1] + 46732.0 / 5247 * k3[1] +
                 49.0 / 176 * k4[1] - 5103.0 / 18656 * k5[1]});
    std::array<double, 2> y5;
    for (int i = 0; i < 2; ++i)
      y5[i] = y0[i] + h * (35.0 / 384 * k1[i] + 500.0 / 1113 * k3[i] +
                           125.0 / 192 * k4[i] - 2187.0 / 6784 * k5[i] +
                           11.0 / 84 * k6[i]);
    k7 = rhs(r + h, y5);
    double err = 0.0;
    for (int i = 0; i < 2; ++i) {
      double e4 = y0[i] + h * (5179.0 / 57600 * k1[i] + 7571.0 / 16695 * k3[i] +
                               393.0 / 640 * k4[i] - 92097.0 / 339200 * k5[i] +
                               187.0 / 2100 * k6[i] + 1.0 / 40 * k7[i]);
      double sc = abs_tol + rel_tol * std::max(std::abs(y0[i]), std::abs(y5[i]));
      double d = (y5[i] - e4) / sc;
      err += d * d;
    }
    err = std::sqrt(0.5 * err);
    double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
    fac = std::clamp(fac, 0.2, 5.0);
    if (err <= 1.0) {
      y = y5;
      h *= fac;
      return true;
    }
    h *= fac;
    return false;
  }
};

enum class Shot { undershoot, overshoot, survived };

struct ShotConfig {
  double k;
  int dim;
  const NonlinearitySpec* spec;
  double r_end;
  double rel_tol;
  double abs_tol;
};

// Series start away from the coordinate singularity:
//   U = b + c2 r^2 + c4 r^4,  2N c2 = k b - f(b),  4(N+2) c4 = (k - f'(b)) c2
std::array<double, 2> series_start(const ShotConfig& cfg, double b, double r0) {
  double c2 = (cfg.k * b - cfg.spec->f(b)) / (2.0 * cfg.dim);
  double c4 = (cfg.k - cfg.spec->fprime(b)) * c2 / (4.0 * (cfg.dim + 2));
  return {b + c2 * r0 * r0 + c4 * r0 * r0 * r0 * r0,
          2.0 * c2 * r0 + 4.0 * c4 * r0 * r0 * r0};
}

Shot classify_shot(const ShotConfig& cfg, double b) {
  auto rhs = [&](double r, const std::array<double, 2>& y) -> std::array<double, 2> {
    return {y[1], cfg.k * y[0] - cfg.spec->f(y[0]) -
                      (cfg.dim - 1) / r * y[1]};
  };
  double r0 = 1e-4 / std::sqrt(cfg.k);
  auto y = series_start(cfg, b, r0);
  double r = r0;
  double h = r0;
  int guard = 0;
  while (r < cfg.r_end) {
    double h_try = std::min(h, cfg.r_end - r);
    double h_io = h_try;
    if (Dp54::step(rhs, r, y, h_io, cfg.rel_tol, cfg.abs_tol)) {
      r += h_try;
      h = (h_try < h) ? std::max(h, h_io) : h_io;
      if (y[0] < 0.0) return Shot::overshoot;
      if (y[1] > 0.0) return Shot::undershoot;
    } else {
      h = h_io;
    }
    if (++guard > 2000000)
      throw SolverError("shooting: step count exceeded during classification");
  }
  return Shot::survived;
}

}  // namespace

double RadialProfile::value_at(double rho) const {
  if (rho >= r_max) return 0.0;
  double d = dr();
  double s = rho / d;
  int j = static_cast<int>(std::floor(s));
  double t = s - j;
  // 4-point Lagrange stencil j-1..j+2; even extension below 0, clamp at the top
  auto val = [&](int i) {
    if (i < 0) i = -i;
    if (i >= n_points) return 0.0;
    return values[i];
  };
  double ym1 = val(j - 1), y0 = val(j), y1 = val(j + 1), y2 = val(j + 2);
  double a = -ym1 / 6 + y0 / 2 - y1 / 2 + y2 / 6;
  double b = ym1 / 2 - y0 + y1 / 2;
  double c = -ym1 / 3 - y0 / 2 + y1 - y2 / 6;
  return ((a * t + b) * t + c) * t + y0;
}

double sphere_surface(int dim) {
  return 2.0 * std::pow(M_PI, 0.5 * dim) / std::tgamma(0.5 * dim);
}

double radial_integral(std::span<const double> w, double dr, int dim) {
  const std::size_t n = w.size();
  double acc = 0.0;
  // composite Simpson over an even number of intervals, trapezoid on the
  // leftover last interval (tail values are negligible there)
  std::size_t m = n - 1;
  std::size_t simpson_end = (m % 2 == 0) ? m : m - 1;
  auto g = [&](std::size_t i) {
    double r = dr * i;
    return w[i] * std::pow(r, dim - 1);
  };
  for (std::size_t i = 0; i + 2 <= simpson_end; i += 2)
    acc += dr / 3.0 * (g(i) + 4.0 * g(i + 1) + g(i + 2));
  if (simpson_end < m) acc += 0.5 * dr * (g(m - 1) + g(m));
  return acc * sphere_surface(dim);
}

double energy_phi(double k, const NonlinearitySpec& spec, const RadialProfile& p) {
  std::vector<double> w(p.n_points);
  for (int i = 0; i < p.n_points; ++i) {
    double u = p.values[i], du = p.derivs[i];
    w[i] = 0.5 * du * du + 0.5 * k * u * u - spec.F(u);
  }
  return radial_integral(w, p.dr(), p.dim);
}

double energy_phi(double k, const NonlinearitySpec& spec, const GroundState& s) {
  return energy_phi(k, spec, s.profile);
}

double pohozaev_residual(const GroundState& s) {
  int N = s.profile.dim;
  double k = s.profile.k;
  double lhs = 0.5 * (N - 2) * s.grad_norm_sq + 0.5 * k * N * s.l2_norm_sq;
  double rhs = N * s.F_integral;
  return std::abs(lhs - rhs) / (0.5 * k * N * s.l2_norm_sq);
}

double nehari_residual(const GroundState& s) {
  double k = s.profile.k;
  double lhs = s.grad_norm_sq + k * s.l2_norm_sq;
  return std::abs(lhs - s.fU_integral) / lhs;
}

GroundState solve_ground_state(double k, const NonlinearitySpec& spec, int dim,
                               double tol, const ShootingOptions& opts) {
  if (!(k > 0.0)) throw ConfigError("ground state: k must be positive");
  spec.validate(dim);

  double r_max = opts.r_max > 0.0 ? opts.r_max : 20.0 / std::sqrt(k);
  int n = opts.n_points;
  if (n < 64) throw ConfigError("ground state: n_points too small");

  // s* with f(s*) = k s*: below it U'' (0) > 0 and the shot turns immediately
  double s_star = crossover_threshold(spec, k);

  ShotConfig cfg{k, dim, &spec, r_max, opts.ode_rel_tol, 0.0};

  // bracket: expand from 1.5 s* until both classifications are represented
  double b_lo = 0.0, b_hi = 0.0;
  {
    double b = 1.5 * s_star;
    cfg.abs_tol = opts.ode_abs_tol_scale * b;
    Shot c = classify_shot(cfg, b);
    if (c == Shot::overshoot) {
      b_hi = b;
      while (b_lo == 0.0) {
        b *= 0.5;
        if (b < 1e-12 * s_star)
          throw SolverError("ground state: bisection bracket not found (no undershoot)");
        cfg.abs_tol = opts.ode_abs_tol_scale * b;
        if (classify_shot(cfg, b) != Shot::overshoot) b_lo = b;
      }
    } else {
      b_lo = b;
      while (b_hi == 0.0) {
        b *= 2.0;
        if (b > 1e12 * s_star)
          throw SolverError("ground state: bisection bracket not found (no overshoot)");
        cfg.abs_tol = opts.ode_abs_tol_scale * b;
        if (classify_shot(cfg, b) == Shot::overshoot) b_hi = b;
      }
    }
  }

  for (int it = 0; it < opts.max_bisection; ++it) {
    double mid = 0.5 * (b_lo + b_hi);
    if (mid == b_lo || mid == b_hi) break;
    cfg.abs_tol = opts.ode_abs_tol_scale * mid;
    (classify_shot(cfg, mid) == Shot::overshoot ? b_hi : b_lo) = mid;
  }
  double b = b_lo;  // the non-crossing side tracks the decaying branch

  // final pass on the output grid
  RadialProfile prof;
  prof.r_max = r_max;
  prof.n_points = n;
  prof.dim = dim;
  prof.k = k;
  prof.values.assign(n, 0.0);
  prof.derivs.assign(n, 0.0);

  auto rhs = [&](double r, const std::array<double, 2>& y) -> std::array<double, 2> {
    return {y[1], k * y[0] - spec.f(y[0]) - (dim - 1) / r * y[1]};
  };
  double d = prof.dr();
  double r0 = 1e-4 / std::sqrt(k);
  auto y = series_start(cfg, b, r0);
  prof.values[0] = b;
  prof.derivs[0] = 0.0;
  double sqrt_k = std::sqrt(k);
  double abs_tol = opts.ode_abs_tol_scale * b;
  int graft_from = -1;
  double r = r0, h = r0;
  for (int i = 1; i < n; ++i) {
    double target = d * i;
    int guard = 0;
    while (r < target) {
      double h_try = std::min(h, target - r);
      double h_io = h_try;
      if (Dp54::step(rhs, r, y, h_io, opts.ode_rel_tol, abs_tol)) {
        r += h_try;
        h = (h_try < h) ? std::max(h, h_io) : h_io;
      } else {
        h = h_io;
      }
      if (++guard > 2000000) throw SolverError("ground state: step count exceeded");
    }
    prof.values[i] = y[0];
    prof.derivs[i] = y[1];
    if (y[0] <= opts.graft_trigger * b && y[1] < 0.0) {
      graft_from = i;
      break;
    }
  }

  // analytic far field: U ~ r^{-(dim-1)/2} exp(-sqrt(k) r)
  if (graft_from > 0) {
    double rg = d * graft_from;
    double ug = prof.values[graft_from];
    double nu = 0.5 * (dim - 1);
    for (int i = graft_from + 1; i < n; ++i) {
      double ri = d * i;
      double ratio = std::pow(rg / ri, nu) * std::exp(-sqrt_k * (ri - rg));
      prof.values[i] = ug * ratio;
      prof.derivs[i] = prof.values[i] * (-sqrt_k - nu / ri);
    }
  }

  // ground-state shape invariants
  if (!(prof.values[n - 1] < 1e-8 * b)) {
    std::ostringstream os;
    os << "ground state: U(r_max)/U(0) = " << prof.values[n - 1] / b
       << " exceeds 1e-8; r_max = " << r_max << " is too small";
    throw SolverError(os.str());
  }
  for (int i = 0; i + 1 < n; ++i) {
    if (!(prof.values[i] > 0.0) || prof.values[i + 1] > prof.values[i] + 1e-13 * b)
      throw SolverError("ground state: profile is not positive and strictly decreasing");
  }

  GroundState gs;
  gs.profile = std::move(prof);
  gs.u0 = b;

  std::vector<double> w(n);
  const auto& P = gs.profile;
  for (int i = 0; i < n; ++i) w[i] = P.derivs[i] * P.derivs[i];
  gs.grad_norm_sq = radial_integral(w, d, dim);
  for (int i = 0; i < n; ++i) w[i] = P.values[i] * P.values[i];
  gs.l2_norm_sq = radial_integral(w, d, dim);
  for (int i = 0; i < n; ++i) w[i] = spec.F(P.values[i]);
  gs.F_integral = radial_integral(w, d, dim);
  for (int i = 0; i < n; ++i) w[i] = spec.f(P.values[i]) * P.values[i];
  gs.fU_integral = radial_integral(w, d, dim);
  gs.energy = 0.5 * gs.grad_norm_sq + 0.5 * k * gs.l2_norm_sq - gs.F_integral;

  // far-field rate from ln(U r^{(dim-1)/2}) over the window [1e-5, 1e-2] * U(0)
  {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (int i = 1; i < n; ++i) {
      double u = P.values[i];
      if (u > 1e-2 * b || u < 1e-5 * b) continue;
      double ri = d * i;
      double yv = std::log(u) + 0.5 * (dim - 1) * std::log(ri);
      sx += ri; sy += yv; sxx += ri * ri; sxy += ri * yv;
      ++cnt;
    }
    gs.decay_rate = cnt >= 2 ? -(cnt * sxy - sx * sy) / (cnt * sxx - sx * sx) : 0.0;
  }

  double poh = pohozaev_residual(gs);
  double neh = nehari_residual(gs);
  if (!(poh < tol) || !(neh < tol)) {
    std::ostringstream os;
    os << "ground state: identity residuals exceed tolerance (pohozaev = " << poh
       << ", nehari = " << neh << ", tol = " << tol << ")";
    throw SolverError(os.str());
  }
  return gs;
}

CurvePoint MPCurve::at(double t) const {
  t = std::clamp(t, 0.0, 1.0);
  if (dim >= 3) return {t > 0.0 ? 1.0 : 0.0, std::max(t * theta, 1e-300)};
  if (t <= 1.0 / 3.0) return {3.0 * t, tau0};
  if (t <= 2.0 / 3.0) return {1.0, tau0 + (3.0 * t - 1.0) * (tau1 - tau0)};
  return {1.0 + (3.0 * t - 2.0) * (tau2 - 1.0), tau1};
}

double MPCurve::energy_of(const CurvePoint& p) const {
  double c = p.amplitude, tau = p.dilation;
  if (c == 0.0) return 0.0;
  double tau_nm2 = std::pow(tau, dim - 2);
  double tau_n = std::pow(tau, dim);
  double Fint = 0.0;
  for (std::size_t i = 0; i < exponents.size(); ++i)
    Fint += coefficients[i] / (exponents[i] + 1.0) *
            std::pow(c, exponents[i] + 1.0) * power_moments[i];
  return 0.5 * c * c * tau_nm2 * grad_sq + 0.5 * k * c * c * tau_n * l2_sq -
         tau_n * Fint;
}

double MPCurve::max_energy(int n_grid) const {
  double best = 0.0;
  for (int i = 0; i <= n_grid; ++i) best = std::max(best, energy_at(double(i) / n_grid));
  return best;
}

MPCurve build_mp_curve(const GroundState& gs, const NonlinearitySpec& spec,
                       double tau0, double tau1) {
  MPCurve c;
  c.dim = gs.profile.dim;
  c.k = gs.profile.k;
  c.grad_sq = gs.grad_norm_sq;
  c.l2_sq = gs.l2_norm_sq;
  c.exponents = spec.exponents;
  c.coefficients = spec.coefficients;
  int n = gs.profile.n_points;
  double d = gs.profile.dr();
  std::vector<double> w(n);
  for (double q : spec.exponents) {
    for (int i = 0; i < n; ++i) w[i] = std::pow(gs.profile.values[i], q + 1.0);
    c.power_moments.push_back(radial_integral(w, d, c.dim));
  }

  double m = gs.energy;
  auto solve_endpoint = [&](auto energy_fn, double lo, double hi) {
    // energy is decreasing past the maximum; bisect on energy = -m/2
    int guard = 0;
    while (energy_fn(hi) > -0.5 * m) {
      hi *= 2.0;
      if (++guard > 200) throw SolverError("mountain pass curve: endpoint search failed");
    }
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      (energy_fn(mid) > -0.5 * m ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi) * 1.02;  // nudge past the root so the endpoint is strictly below -m/2
  };

  if (c.dim >= 3) {
    c.theta = solve_endpoint([&](double th) { return c.energy_of({1.0, th}); }, 1.0, 2.0);
    c.t_peak = 1.0 / c.theta;
  } else {
    if (!(tau0 > 0.0 && tau0 < 1.0 && tau1 > 1.0))
      throw ConfigError("mountain pass curve: need 0 < tau0 < 1 < tau1");
    c.tau0 = tau0;
    c.tau1 = tau1;
    c.tau2 = solve_endpoint([&](double a) { return c.energy_of({a, tau1}); }, 1.0, 2.0);
    c.t_peak = (1.0 + (1.0 - tau0) / (tau1 - tau0)) / 3.0;
  }

  if (!(c.energy_at(1.0) < -0.5 * m))
    throw SolverError("mountain pass curve: endpoint energy is not below -m/2");
  return c;
}

std::vector<std::pair<double, double>> m_curve(std::span<const double> k_values,
                                               const NonlinearitySpec& spec, int dim,
                                               double tol, const ShootingOptions& opts) {
  std::vector<std::pair<double, double>> table;
  for (double k : k_values) {
    GroundState gs = solve_ground_state(k, spec, dim, tol, opts);
    table.emplace_back(k, gs.energy);
  }
  std::sort(table.begin(), table.end());
  return table;
}

}  // namespace spikelab

#include "spikelab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "spikelab/errors.hpp"

namespace spikelab {

namespace {

double quad_offset(double fm, double f0, double fp) {
  double denom = fm - 2.0 * f0 + fp;
  if (denom == 0.0) return 0.0;
  return std::clamp(0.5 * (fm - fp) / denom, -0.5, 0.5);
}

}  // namespace

std::array<double, 2> spike_center(const GridField& u) {
  int bi = 1, bj = 1;
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < u.n; ++i)
    for (int j = 0; j < u.n; ++j)
      if (u.at(i, j) > best) {
        best = u.at(i, j);
        bi = i;
        bj = j;
      }
  if (best <= 0.0) throw SolverError("spike center: field has no positive values");
  double h = u.h();
  auto c = u.coord(bi, bj);
  if (bi > 0 && bi + 1 < u.n)
    c[0] += h * quad_offset(u.at(bi - 1, bj), u.at(bi, bj), u.at(bi + 1, bj));
  if (bj > 0 && bj + 1 < u.n)
    c[1] += h * quad_offset(u.at(bi, bj - 1), u.at(bi, bj), u.at(bi, bj + 1));
  return c;
}

GroundStateDistance distance_to_ground_states(const GridField& u,
                                              const GroundState& state) {
  const double h = u.h();
  auto dist_at = [&](std::array<double, 2> y) {
    GridField v = interpolate_radial(state.profile, u.n, u.L, y);
    for (std::size_t i = 0; i < v.v.size(); ++i) v.v[i] = u.v[i] - v.v[i];
    return h1_norm(v);
  };

  auto c0 = spike_center(u);
  GroundStateDistance best;
  best.distance = std::numeric_limits<double>::infinity();
  for (int di = -2; di <= 2; ++di) {
    for (int dj = -2; dj <= 2; ++dj) {
      std::array<double, 2> y{c0[0] + di * h, c0[1] + dj * h};
      double d = dist_at(y);
      if (d < best.distance) best = {d, y};
    }
  }

  // golden-section per axis around the lattice winner
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int round = 0; round < 2; ++round) {
    for (int axis = 0; axis < 2; ++axis) {
      double lo = best.center[axis] - h, hi = best.center[axis] + h;
      double a = hi - phi * (hi - lo), b = lo + phi * (hi - lo);
      auto eval = [&](double t) {
        auto y = best.center;
        y[axis] = t;
        return dist_at(y);
      };
      double fa = eval(a), fb = eval(b);
      for (int it = 0; it < 24; ++it) {
        if (fa < fb) {
          hi = b; b = a; fb = fa;
          a = hi - phi * (hi - lo);
          fa = eval(a);
        } else {
          lo = a; a = b; fa = fb;
          b = lo + phi * (hi - lo);
          fb = eval(b);
        }
      }
      best.center[axis] = 0.5 * (lo + hi);
      best.distance = dist_at(best.center);
    }
  }
  return best;
}

UntruncationReport untruncation_check(const EpsProblem& p, const GridField& u) {
  UntruncationReport rep;
  rep.crossover = p.truncated().crossover();
  const int n = u.n;
  double R1_eps = p.truncation().radii[1] / p.eps();
  rep.max_outside = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      auto x = u.coord(i, j);
      if (std::hypot(x[0], x[1]) <= R1_eps) continue;
      if (u.at(i, j) > rep.max_outside) {
        rep.max_outside = u.at(i, j);
        rep.arg_outside = x;
      }
    }
  }
  rep.passes = rep.max_outside < rep.crossover;

  GridField r_trunc = gradient(p, u);
  GridField r_plain = gradient_plain(p, u);
  rep.truncated_residual_sup = sup_norm(r_trunc);
  rep.plain_residual_sup = sup_norm(r_plain);
  rep.residual_paths_identical = r_trunc.v == r_plain.v;
  return rep;
}

double local_identity_residual(const EpsProblem& p, const GridField& u,
                               std::array<double, 2> center_grid, double radius_grid,
                               std::array<double, 2> nu) {
  const int n = u.n;
  const double h = u.h();
  if (std::abs(center_grid[0]) + radius_grid > u.L ||
      std::abs(center_grid[1]) + radius_grid > u.L)
    throw ConfigError("local identity: ball exceeds the grid");
  double nn = std::hypot(nu[0], nu[1]);
  if (nn == 0.0) throw ConfigError("local identity: direction must be nonzero");
  nu[0] /= nn;
  nu[1] /= nn;

  double eps = p.eps();
  std::array<double, 2> c_phys{eps * center_grid[0], eps * center_grid[1]};

  auto gv = p.potential().gradient(std::span<const double>(c_phys.data(), 2));
  double dV = gv[0] * nu[0] + gv[1] * nu[1];

  // radial cutoff derivative at the physical center, one-sided from the
  // region the center sits in
  double rho = std::hypot(c_phys[0], c_phys[1]);
  const auto& R = p.truncation().radii;
  double dchi = 0.0;
  if (rho > R[1] && rho < R[2])
    dchi = -(c_phys[0] * nu[0] + c_phys[1] * nu[1]) / (rho * (R[2] - R[1]));

  const auto& tn = p.truncated();
  double I_u2 = 0.0, I_FF = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      auto x = u.coord(i, j);
      double dx0 = x[0] - center_grid[0], dx1 = x[1] - center_grid[1];
      if (dx0 * dx0 + dx1 * dx1 > radius_grid * radius_grid) continue;
      double s = u.at(i, j);
      I_u2 += s * s;
      I_FF += tn.F(s) - tn.Ftilde(s);
    }
  }
  I_u2 *= h * h;
  I_FF *= h * h;

  // gradient scale of V over the barycenter window
  double vmax = 0.0;
  for (int ir = 1; ir <= 64; ++ir) {
    for (int ia = 0; ia < 64; ++ia) {
      double rr = R[3] * ir / 64.0, th = 2.0 * M_PI * ia / 64.0;
      double xs[2] = {rr * std::cos(th), rr * std::sin(th)};
      auto g = p.potential().gradient(std::span<const double>(xs, 2));
      vmax = std::max(vmax, std::hypot(g[0], g[1]));
    }
  }
  double scale = 0.5 * vmax * I_u2;
  if (scale == 0.0) throw SolverError("local identity: degenerate normalization");
  return (0.5 * dV * I_u2 - dchi * I_FF) / scale;
}

LambdaFit lambda_scaling(std::span<const std::array<double, 2>> sweep,
                         double noise_floor) {
  LambdaFit fit;
  std::vector<std::array<double, 2>> pts;
  for (const auto& e : sweep)
    if (e[1] >= noise_floor) pts.push_back(e);
  if (pts.size() < 2) {
    fit.degenerate = true;
    return fit;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& e : pts) {
    double x = std::log(e[0]), y = std::log(e[1]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  double m = static_cast<double>(pts.size());
  fit.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  fit.C = std::exp((sy - fit.slope * sx) / m);
  return fit;
}

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

std::string convergence_table(std::span<const SweepRow> rows) {
  std::ostringstream os;
  os << "   eps      E_lower        E_upper        |E-m|       |E-m_grid|   "
        "|eps*y|     h1_dist     |lambda|    delta      deg  status\n";
  for (const auto& r : rows) {
    double ey = std::hypot(r.eps_y[0], r.eps_y[1]);
    os << fmt("%7.4f", r.eps) << "  " << fmt("%-13.8g", r.energy_lower) << "  "
       << fmt("%-13.8g", r.energy_upper) << "  "
       << fmt("%-10.4g", std::abs(r.energy_lower - r.m_reference)) << "  "
       << fmt("%-10.4g", std::abs(r.energy_lower - r.m_grid)) << "   "
       << fmt("%-10.4g", ey) << "  " << fmt("%-10.4g", r.h1_distance) << "  "
       << fmt("%-10.4g", r.lambda_norm) << "  " << fmt("%-9.4g", r.delta_gap)
       << "  " << r.degree << "    " << r.status << "\n";
  }
  return os.str();
}

std::string sweep_csv(std::span<const SweepRow> rows) {
  std::ostringstream os;
  os << "eps,energy_lower,energy_upper,lambda_norm,barycenter_norm,delta_gap,degree\n";
  for (const auto& r : rows) {
    os << fmt("%.17g", r.eps) << "," << fmt("%.17g", r.energy_lower) << ","
       << fmt("%.17g", r.energy_upper) << "," << fmt("%.17g", r.lambda_norm) << ","
       << fmt("%.17g", r.barycenter_norm) << "," << fmt("%.17g", r.delta_gap) << ","
       << r.degree << "\n";
  }
  return os.str();
}

std::string convergence_csv(std::span<const SweepRow> rows) {
  std::ostringstream os;
  os << "eps,grid_n,energy_lower,energy_upper,m_reference,m_grid,abs_err_m,"
        "abs_err_m_grid,eps_y_1,eps_y_2,h1_distance,h1_norm_U,lambda_norm,"
        "barycenter_norm,delta_gap,delta_gap_matched,degree,max_outside_B1,"
        "untruncation_ok,status\n";
  for (const auto& r : rows) {
    os << fmt("%.17g", r.eps) << "," << r.grid_n << ","
       << fmt("%.17g", r.energy_lower) << "," << fmt("%.17g", r.energy_upper) << ","
       << fmt("%.17g", r.m_reference) << "," << fmt("%.17g", r.m_grid) << ","
       << fmt("%.17g", std::abs(r.energy_lower - r.m_reference)) << ","
       << fmt("%.17g", std::abs(r.energy_lower - r.m_grid)) << ","
       << fmt("%.17g", r.eps_y[0]) << "," << fmt("%.17g", r.eps_y[1]) << ","
       << fmt("%.17g", r.h1_distance) << "," << fmt("%.17g", r.h1_norm_U) << ","
       << fmt("%.17g", r.lambda_norm) << "," << fmt("%.17g", r.barycenter_norm) << ","
       << fmt("%.17g", r.delta_gap) << "," << fmt("%.17g", r.delta_gap_matched)
       << "," << r.degree << ","
       << fmt("%.17g", r.max_outside_B1) << "," << (r.untruncation_ok ? 1 : 0) << ","
       << r.status << "\n";
  }
  return os.str();
}

}  // namespace spikelab

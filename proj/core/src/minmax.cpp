#include "spikelab/minmax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "krylov.hpp"
#include "spikelab/errors.hpp"

namespace spikelab {

ConeSampler::ConeSampler(const MPCurve& curve, const GroundState& state,
                         double xi_max, int dim_E, Options opts)
    : curve_(curve),
      profile_(&state.profile),
      m_base_(state.energy),
      xi_max_(xi_max),
      dim_E_(dim_E),
      opts_(opts) {
  if (dim_E_ < 1 || dim_E_ > 2)
    throw ConfigError("cone: dim E must be 1 or 2 on a planar grid");
}

std::vector<double> ConeSampler::t_grid() const {
  std::vector<double> ts(opts_.nt);
  for (int i = 0; i < opts_.nt; ++i) ts[i] = double(i) / (opts_.nt - 1);
  return ts;
}

std::vector<std::array<double, 2>> ConeSampler::interior_xi() const {
  std::vector<std::array<double, 2>> xs;
  if (dim_E_ == 1) {
    for (int i = 0; i < opts_.nxi; ++i) {
      double c = -xi_max_ + 2.0 * xi_max_ * i / (opts_.nxi - 1);
      xs.push_back({c, 0.0});
    }
  } else {
    xs.push_back({0.0, 0.0});
    for (int ir = 1; ir <= opts_.n_radii; ++ir) {
      double rho = xi_max_ * ir / opts_.n_radii;
      for (int ia = 0; ia < opts_.n_angles; ++ia) {
        double th = 2.0 * M_PI * ia / opts_.n_angles;
        xs.push_back({rho * std::cos(th), rho * std::sin(th)});
      }
    }
  }
  return xs;
}

std::vector<std::array<double, 2>> ConeSampler::boundary_xi(int n_override) const {
  std::vector<std::array<double, 2>> xs;
  if (dim_E_ == 1) {
    xs.push_back({-xi_max_, 0.0});
    xs.push_back({xi_max_, 0.0});
  } else {
    int n = n_override > 0 ? n_override : opts_.n_boundary;
    for (int ia = 0; ia < n; ++ia) {
      double th = 2.0 * M_PI * ia / n;
      xs.push_back({xi_max_ * std::cos(th), xi_max_ * std::sin(th)});
    }
  }
  return xs;
}

GridField cone_element(const EpsProblem& p, const ConeSampler& s, double t,
                       std::array<double, 2> xi_E) {
  CurvePoint cp = s.curve().at(t);
  const auto& basis = p.critical_point().E_basis;
  std::array<double, 2> center{0.0, 0.0};
  for (int k = 0; k < s.dim_E(); ++k) {
    center[0] += xi_E[k] * basis[k][0];
    center[1] += xi_E[k] * basis[k][1];
  }
  if (cp.amplitude == 0.0) return p.zeros();
  return interpolate_radial(s.profile(), p.n(), p.L(), center, cp.amplitude,
                            cp.dilation);
}

ConeScanResult cone_max_energy(const EpsProblem& p, const ConeSampler& s) {
  ConeScanResult best;
  best.max_energy = -std::numeric_limits<double>::infinity();
  for (double t : s.t_grid()) {
    for (const auto& xi : s.interior_xi()) {
      double e = energy(p, cone_element(p, s, t, xi));
      if (e > best.max_energy) best = {e, t, xi};
    }
  }
  return best;
}

BoundaryGapResult boundary_gap(const EpsProblem& p, const ConeSampler& s,
                               std::optional<double> reference_level) {
  BoundaryGapResult out;
  out.reference_level = reference_level.value_or(s.base_energy());

  out.max_top_energy = -std::numeric_limits<double>::infinity();
  for (const auto& xi : s.interior_xi())
    out.max_top_energy = std::max(out.max_top_energy,
                                  energy(p, cone_element(p, s, 1.0, xi)));
  for (const auto& xi : s.boundary_xi())
    out.max_top_energy = std::max(out.max_top_energy,
                                  energy(p, cone_element(p, s, 1.0, xi)));
  out.top_negative = out.max_top_energy < 0.0;

  out.max_side_energy = -std::numeric_limits<double>::infinity();
  for (double t : s.t_grid())
    for (const auto& xi : s.boundary_xi())
      out.max_side_energy = std::max(out.max_side_energy,
                                     energy(p, cone_element(p, s, t, xi)));

  out.delta = out.reference_level - std::max(out.max_side_energy, out.max_top_energy);
  return out;
}

std::vector<double> psi_map(const EpsProblem& p, const ConeSampler& s, double t,
                            std::array<double, 2> xi_E) {
  GridField u = cone_element(p, s, t, xi_E);
  return barycenter(p, u);
}

DegreeResult degree_check(const EpsProblem& p, const ConeSampler& s, double t,
                          int n_boundary) {
  DegreeResult out;
  out.t = t;
  const double tiny = 1e-12 * s.xi_max();
  if (s.dim_E() == 1) {
    double lo = psi_map(p, s, t, {-s.xi_max(), 0.0})[0];
    double hi = psi_map(p, s, t, {s.xi_max(), 0.0})[0];
    out.trace.push_back({-s.xi_max(), 0.0, lo, 0.0});
    out.trace.push_back({s.xi_max(), 0.0, hi, 0.0});
    if (std::abs(lo) < tiny || std::abs(hi) < tiny)
      throw SolverError("degree: psi vanishes on the boundary sample; refine the grid");
    int slo = lo > 0.0 ? 1 : -1, shi = hi > 0.0 ? 1 : -1;
    out.degree = (shi - slo) / 2;
    return out;
  }
  auto ring = s.boundary_xi(n_boundary);
  std::vector<double> angles;
  angles.reserve(ring.size());
  for (const auto& xi : ring) {
    auto psi = psi_map(p, s, t, xi);
    double nrm = std::hypot(psi[0], psi[1]);
    if (nrm < tiny)
      throw SolverError("degree: psi vanishes on the boundary sample; refine the grid");
    out.trace.push_back({xi[0], xi[1], psi[0], psi[1]});
    angles.push_back(std::atan2(psi[1], psi[0]));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < angles.size(); ++i) {
    double d = angles[(i + 1) % angles.size()] - angles[i];
    while (d > M_PI) d -= 2.0 * M_PI;
    while (d < -M_PI) d += 2.0 * M_PI;
    if (std::abs(d) > 0.5 * M_PI)
      throw SolverError("degree: winding increment too large; refine the boundary sample");
    total += d;
  }
  out.degree = static_cast<int>(std::lround(total / (2.0 * M_PI)));
  return out;
}

namespace {

struct ConstrainedJacobian {
  const EpsProblem& p;
  const GridField& u;
  std::span<const double> lambda;

  void operator()(const std::vector<double>& w, std::vector<double>& out) const {
    const int n = u.n;
    const double inv_h2 = 1.0 / (u.h() * u.h());
    const auto& tn = p.truncated();
    std::fill(out.begin(), out.end(), 0.0);
    for (int i = 1; i + 1 < n; ++i) {
      for (int j = 1; j + 1 < n; ++j) {
        int id = i * n + j;
        double lap = (4.0 * w[id] - w[id - n] - w[id + n] - w[id - 1] - w[id + 1]) * inv_h2;
        double pot = p.v_at(i, j) - tn.g_prime(p.chi_at(i, j), u.at(i, j));
        for (std::size_t k = 0; k < lambda.size(); ++k)
          pot -= lambda[k] * p.h_weight(static_cast<int>(k), i, j);
        out[id] = lap + pot * w[id];
      }
    }
  }
};

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

SaddleResult constrained_saddle(const EpsProblem& p, const GridField& seed,
                                double tol, int max_iter, double min_energy_accept) {
  const int d = p.dim_E();
  const int n = p.n();
  const double h2 = p.h() * p.h();
  GridField u = seed;
  u.zero_boundary();
  std::vector<double> lambda(d, 0.0);
  const int minres_cap = std::min(20000, std::max(1500, 8 * n));

  auto constraint = [&](const GridField& w, double& den_out) {
    std::vector<double> C(d, 0.0);
    double den = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s2 = w.at(i, j) * w.at(i, j);
        den += s2;
        for (int k = 0; k < d; ++k) C[k] += p.h_weight(k, i, j) * s2;
      }
    for (auto& c : C) c *= h2;
    den_out = den * h2;
    return C;
  };

  auto merit = [&](const GridField& w, std::span<const double> lam) {
    GridField r = gradient(p, w, lam);
    double den = 0.0;
    auto C = constraint(w, den);
    double m = inner_product(r, r);
    if (den > 0.0)
      for (double c : C) m += (c / den) * (c / den);
    return m;
  };

  SaddleResult out;
  bool converged = false;
  double rsup0 = 0.0;
  for (int it = 0; it <= max_iter; ++it) {
    GridField r = gradient(p, u, lambda);
    double rsup = sup_norm(r);
    double den = 0.0;
    auto C = constraint(u, den);
    if (den == 0.0) throw SolverError("saddle: iterate collapsed to the zero field");
    double bnorm = 0.0;
    for (double c : C) bnorm += (c / den) * (c / den);
    bnorm = std::sqrt(bnorm);
    if (it == 0) rsup0 = std::max(rsup, 1.0);
    out.iterations = it;
    out.residual_sup = rsup;
    out.barycenter_norm = bnorm;
    if (!std::isfinite(rsup)) throw SolverError("saddle: residual diverged");
    if (rsup < tol && bnorm < tol) {
      converged = true;
      break;
    }
    if (it == max_iter) break;

    ConstrainedJacobian J{p, u, lambda};
    double inner_tol = std::clamp(0.1 * std::max(rsup, bnorm * rsup0) / rsup0,
                                  1e-6, 1e-2);

    std::vector<double> rhs(r.v);
    for (auto& x : rhs) x = -x;
    std::vector<double> z0 = detail::minres(J, rhs, inner_tol, minres_cap);

    // columns J^{-1}(h_k u) for the multiplier block
    std::vector<std::vector<double>> zk(d);
    for (int k = 0; k < d; ++k) {
      std::vector<double> bk(u.v.size(), 0.0);
      for (int i = 1; i + 1 < n; ++i)
        for (int j = 1; j + 1 < n; ++j)
          bk[i * n + j] = p.h_weight(k, i, j) * u.at(i, j);
      zk[k] = detail::minres(J, bk, inner_tol, minres_cap);
    }

    // Schur system for delta lambda: 2 <h_k u, z0 + sum_l dl_l z_l> = -C_k
    std::vector<double> hu(d * u.v.size());
    for (int k = 0; k < d; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          hu[k * u.v.size() + i * n + j] = p.h_weight(k, i, j) * u.at(i, j);
    std::vector<double> M(d * d, 0.0), rhs_l(d, 0.0);
    for (int k = 0; k < d; ++k) {
      std::span<const double> huk(&hu[k * u.v.size()], u.v.size());
      rhs_l[k] = -C[k] / h2 - 2.0 * dot(huk, z0);
      for (int l = 0; l < d; ++l) M[k * d + l] = 2.0 * dot(huk, zk[l]);
    }
    std::vector<double> dl(d, 0.0);
    if (d == 1) {
      if (M[0] == 0.0) throw SolverError("saddle: singular multiplier block");
      dl[0] = rhs_l[0] / M[0];
    } else {
      double det = M[0] * M[3] - M[1] * M[2];
      if (det == 0.0) throw SolverError("saddle: singular multiplier block");
      dl[0] = (rhs_l[0] * M[3] - M[1] * rhs_l[1]) / det;
      dl[1] = (M[0] * rhs_l[1] - rhs_l[0] * M[2]) / det;
    }

    std::vector<double> du(z0);
    for (int k = 0; k < d; ++k)
      for (std::size_t i = 0; i < du.size(); ++i) du[i] += dl[k] * zk[k][i];

    double m0 = merit(u, lambda);
    double step = 1.0;
    GridField trial = u;
    std::vector<double> ltrial(lambda);
    for (int bt = 0; bt < 12; ++bt) {
      for (std::size_t i = 0; i < u.v.size(); ++i) trial.v[i] = u.v[i] + step * du[i];
      for (int k = 0; k < d; ++k) ltrial[k] = lambda[k] + step * dl[k];
      if (merit(trial, ltrial) < (1.0 - 1e-4 * step) * m0) break;
      step *= 0.5;
    }
    for (std::size_t i = 0; i < u.v.size(); ++i) u.v[i] += step * du[i];
    for (int k = 0; k < d; ++k) lambda[k] += step * dl[k];
    u.zero_boundary();
  }

  if (!converged) {
    std::ostringstream os;
    os << "saddle: no convergence within " << max_iter
       << " iterations (residual " << out.residual_sup << ", barycenter "
       << out.barycenter_norm << ")";
    throw SolverError(os.str());
  }
  out.u = std::move(u);
  out.lambda = std::move(lambda);
  out.energy = energy(p, out.u);
  if (out.energy < min_energy_accept) {
    std::ostringstream os;
    os << "saddle: converged to a low-energy solution (energy " << out.energy
       << " below accept threshold " << min_energy_accept << ")";
    throw SolverError(os.str());
  }
  return out;
}

MEpsBracket estimate_m_eps(const EpsProblem&, const ConeSampler&,
                           const ConeScanResult& scan, const SaddleResult& saddle) {
  return {saddle.energy, scan.max_energy};
}

}  // namespace spikelab

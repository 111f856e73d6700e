#include "spikelab/potential.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "spikelab/errors.hpp"

namespace spikelab {

namespace {

double sq_norm(std::span<const double> x) {
  double s = 0.0;
  for (double xi : x) s += xi * xi;
  return s;
}

// Built-in kinds expand to monomial lists so one evaluation path serves all.
std::vector<PotentialSpec::Monomial> effective_monomials(const PotentialSpec& spec) {
  using M = PotentialSpec::Monomial;
  switch (spec.kind) {
    case PotentialSpec::Kind::gaussian_saddle: {
      M neg, pos;
      neg.coefficient = -1.0;
      neg.powers.assign(spec.dim, 0);
      neg.powers[0] = 2;
      pos.coefficient = 1.0;
      pos.powers.assign(spec.dim, 0);
      pos.powers[1] = 2;
      return {neg, pos};
    }
    case PotentialSpec::Kind::gaussian_max: {
      std::vector<M> ms;
      for (int i = 0; i < spec.dim; ++i) {
        M m;
        m.coefficient = -1.0;
        m.powers.assign(spec.dim, 0);
        m.powers[i] = 2;
        ms.push_back(m);
      }
      return ms;
    }
    case PotentialSpec::Kind::custom_polynomial_bump:
      return spec.monomials;
  }
  return {};
}

double mono_eval(const PotentialSpec::Monomial& m, std::span<const double> x) {
  double v = m.coefficient;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (int k = 0; k < m.powers[i]; ++k) v *= x[i];
  return v;
}

// d/dx_j of the monomial
double mono_deriv(const PotentialSpec::Monomial& m, std::span<const double> x, int j) {
  if (m.powers[j] == 0) return 0.0;
  double v = m.coefficient * m.powers[j];
  for (std::size_t i = 0; i < x.size(); ++i) {
    int pw = m.powers[i] - (static_cast<int>(i) == j ? 1 : 0);
    for (int k = 0; k < pw; ++k) v *= x[i];
  }
  return v;
}

double mono_deriv2(const PotentialSpec::Monomial& m, std::span<const double> x,
                   int j, int l) {
  int pj = m.powers[j] - (j == l ? 0 : 0);
  if (j == l) {
    if (m.powers[j] < 2) return 0.0;
    double v = m.coefficient * m.powers[j] * (m.powers[j] - 1);
    for (std::size_t i = 0; i < x.size(); ++i) {
      int pw = m.powers[i] - (static_cast<int>(i) == j ? 2 : 0);
      for (int k = 0; k < pw; ++k) v *= x[i];
    }
    return v;
  }
  (void)pj;
  if (m.powers[j] == 0 || m.powers[l] == 0) return 0.0;
  double v = m.coefficient * m.powers[j] * m.powers[l];
  for (std::size_t i = 0; i < x.size(); ++i) {
    int pw = m.powers[i];
    if (static_cast<int>(i) == j) pw -= 1;
    if (static_cast<int>(i) == l) pw -= 1;
    for (int k = 0; k < pw; ++k) v *= x[i];
  }
  return v;
}

// max over r >= 0 of B(r) = sum_j |c_j| r^{d_j} * exp(-r^2), by golden-section
// on [0, 8] refined with a coarse pre-scan.
double envelope_max(const std::vector<PotentialSpec::Monomial>& ms) {
  auto B = [&](double r) {
    double acc = 0.0;
    for (const auto& m : ms) {
      int d = 0;
      for (int p : m.powers) d += p;
      acc += std::abs(m.coefficient) * std::pow(r, d);
    }
    return acc * std::exp(-r * r);
  };
  double best_r = 0.0, best = 0.0;
  for (int i = 0; i <= 800; ++i) {
    double r = 8.0 * i / 800.0;
    double v = B(r);
    if (v > best) {
      best = v;
      best_r = r;
    }
  }
  double lo = std::max(0.0, best_r - 0.02), hi = std::min(8.0, best_r + 0.02);
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - phi * (hi - lo), d = lo + phi * (hi - lo);
  for (int it = 0; it < 200; ++it) {
    if (B(c) < B(d)) lo = c; else hi = d;
    c = hi - phi * (hi - lo);
    d = lo + phi * (hi - lo);
  }
  return B(0.5 * (lo + hi));
}

std::vector<std::vector<double>> orthonormalize(
    const std::vector<std::vector<double>>& vs, int dim) {
  std::vector<std::vector<double>> out;
  for (auto v : vs) {
    if (static_cast<int>(v.size()) != dim)
      throw ConfigError("potential: user E basis vector has wrong dimension");
    for (const auto& u : out) {
      double dot = 0.0;
      for (int i = 0; i < dim; ++i) dot += u[i] * v[i];
      for (int i = 0; i < dim; ++i) v[i] -= dot * u[i];
    }
    double nrm = std::sqrt(sq_norm(v));
    if (nrm < 1e-12)
      throw ConfigError("potential: user E basis is linearly dependent");
    for (auto& vi : v) vi /= nrm;
    out.push_back(std::move(v));
  }
  return out;
}

// Unit directions spanning a subspace: endpoints for a 1D subspace, an angular
// grid for 2D, seeded random directions otherwise.
std::vector<std::vector<double>> subspace_directions(
    const std::vector<std::vector<double>>& basis, int dim, int n_samples) {
  std::vector<std::vector<double>> dirs;
  int k = static_cast<int>(basis.size());
  if (k == 0) return dirs;
  if (k == 1) {
    dirs.push_back(basis[0]);
    std::vector<double> neg(basis[0]);
    for (auto& v : neg) v = -v;
    dirs.push_back(std::move(neg));
    return dirs;
  }
  if (k == 2) {
    int n = std::max(16, n_samples);
    for (int j = 0; j < n; ++j) {
      double th = 2.0 * M_PI * j / n;
      std::vector<double> d(dim, 0.0);
      for (int i = 0; i < dim; ++i)
        d[i] = std::cos(th) * basis[0][i] + std::sin(th) * basis[1][i];
      dirs.push_back(std::move(d));
    }
    return dirs;
  }
  std::mt19937_64 rng(0x5eed5eedULL);
  std::normal_distribution<double> gauss;
  for (int j = 0; j < n_samples; ++j) {
    std::vector<double> c(k);
    double nrm = 0.0;
    for (auto& ci : c) {
      ci = gauss(rng);
      nrm += ci * ci;
    }
    nrm = std::sqrt(nrm);
    std::vector<double> d(dim, 0.0);
    for (int i = 0; i < dim; ++i)
      for (int l = 0; l < k; ++l) d[i] += c[l] / nrm * basis[l][i];
    dirs.push_back(std::move(d));
  }
  return dirs;
}

}  // namespace

double PotentialSpec::alpha1() const {
  switch (kind) {
    case Kind::gaussian_saddle:
    case Kind::gaussian_max:
      return 1.0 - beta * std::exp(-1.0);
    case Kind::custom_polynomial_bump:
      return 1.0 - beta * envelope_max(monomials);
  }
  return 0.0;
}

double PotentialSpec::alpha2() const {
  switch (kind) {
    case Kind::gaussian_saddle:
      return 1.0 + beta * std::exp(-1.0);
    case Kind::gaussian_max:
      return 1.0;
    case Kind::custom_polynomial_bump:
      return 1.0 + beta * envelope_max(monomials);
  }
  return 0.0;
}

void PotentialSpec::validate() const {
  if (dim < 2) throw ConfigError("potential: dim must be >= 2");
  if (!(beta > 0.0)) throw ConfigError("potential: beta must be positive");
  if (kind == Kind::custom_polynomial_bump) {
    if (monomials.empty())
      throw ConfigError("potential: custom_polynomial_bump needs monomials");
    for (const auto& m : monomials) {
      if (static_cast<int>(m.powers.size()) != dim)
        throw ConfigError("potential: monomial power list must have dim entries");
      int total = 0;
      for (int p : m.powers) {
        if (p < 0) throw ConfigError("potential: monomial powers must be >= 0");
        total += p;
      }
      if (total < 2)
        throw ConfigError("potential: monomials need total degree >= 2 so that 0 stays a critical point");
    }
  }
}

double PotentialSpec::value(std::span<const double> x) const {
  double P = 0.0;
  for (const auto& m : effective_monomials(*this)) P += mono_eval(m, x);
  return 1.0 + beta * P * std::exp(-sq_norm(x));
}

std::vector<double> PotentialSpec::gradient(std::span<const double> x) const {
  int n = dim;
  std::vector<double> grad(n, 0.0);
  double P = 0.0;
  auto ms = effective_monomials(*this);
  for (const auto& m : ms) P += mono_eval(m, x);
  double e = std::exp(-sq_norm(x));
  for (int j = 0; j < n; ++j) {
    double dP = 0.0;
    for (const auto& m : ms) dP += mono_deriv(m, x, j);
    grad[j] = beta * (dP - 2.0 * P * x[j]) * e;
  }
  return grad;
}

std::vector<double> PotentialSpec::hessian(std::span<const double> x) const {
  int n = dim;
  std::vector<double> H(n * n, 0.0);
  auto ms = effective_monomials(*this);
  double P = 0.0;
  for (const auto& m : ms) P += mono_eval(m, x);
  std::vector<double> dP(n, 0.0);
  for (int j = 0; j < n; ++j)
    for (const auto& m : ms) dP[j] += mono_deriv(m, x, j);
  double e = std::exp(-sq_norm(x));
  for (int j = 0; j < n; ++j) {
    for (int l = 0; l < n; ++l) {
      double d2P = 0.0;
      for (const auto& m : ms) d2P += mono_deriv2(m, x, j, l);
      double v = d2P - 2.0 * (dP[j] * x[l] + x[j] * dP[l]) + 4.0 * P * x[j] * x[l];
      if (j == l) v -= 2.0 * P;
      H[j * n + l] = beta * v * e;
    }
  }
  return H;
}

std::string CriticalPointClass::tag_name() const {
  switch (tag) {
    case Case::V1: return "V1";
    case Case::V2: return "V2";
    case Case::V3: return "V3";
  }
  return "?";
}

CriticalPointClass classify_critical_point(const PotentialSpec& spec,
                                           const ClassifyOptions& opts) {
  spec.validate();
  int n = spec.dim;
  std::vector<double> origin(n, 0.0);

  auto grad0 = spec.gradient(origin);
  for (double g : grad0)
    if (std::abs(g) > opts.tol)
      throw SolverError("classify: gradient at 0 is not zero");

  auto H = spec.hessian(origin);
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = H[i * n + j];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);

  CriticalPointClass out;
  out.hessian_eigenvalues.assign(es.eigenvalues().data(),
                                 es.eigenvalues().data() + n);

  int n_neg = 0, n_pos = 0, n_zero = 0;
  for (double ev : out.hessian_eigenvalues) {
    if (ev < -opts.tol) ++n_neg;
    else if (ev > opts.tol) ++n_pos;
    else ++n_zero;
  }

  auto sphere_confirm = [&](const std::vector<std::vector<double>>& basis,
                            bool expect_max) {
    for (const auto& d : subspace_directions(basis, n, opts.sphere_samples)) {
      std::vector<double> x(n);
      for (int i = 0; i < n; ++i) x[i] = opts.sphere_radius * d[i];
      double v = spec.value(x);
      if (expect_max ? !(v < 1.0) : !(v > 1.0)) return false;
    }
    return true;
  };

  if (n_zero == 0 && n_neg == n) {
    out.tag = CriticalPointClass::Case::V1;
    for (int i = 0; i < n; ++i) {
      std::vector<double> e(n, 0.0);
      e[i] = 1.0;
      out.E_basis.push_back(std::move(e));
    }
  } else if (n_zero == 0 && n_neg > 0 && n_pos > 0) {
    out.tag = CriticalPointClass::Case::V2;
    for (int i = 0; i < n; ++i) {
      if (out.hessian_eigenvalues[i] < 0.0) {
        std::vector<double> e(n);
        for (int j = 0; j < n; ++j) e[j] = es.eigenvectors()(j, i);
        out.E_basis.push_back(std::move(e));
      }
    }
  } else if (n_zero == 0 && n_neg == 0) {
    throw SolverError("classify: 0 is a local minimum of V; no spike subspace E");
  } else {
    if (opts.user_E.empty())
      throw SolverError("classify: degenerate Hessian at 0; a user-supplied E basis is required");
    out.tag = CriticalPointClass::Case::V3;
    out.E_basis = orthonormalize(opts.user_E, n);
  }

  // max/min split on small spheres, for every case
  if (!sphere_confirm(out.E_basis, /*expect_max=*/true))
    throw SolverError("classify: V restricted to E has no strict local max at 0");
  if (out.dim_E() < n) {
    // orthonormal complement via Eigen
    Eigen::MatrixXd B(n, out.dim_E());
    for (int j = 0; j < out.dim_E(); ++j)
      for (int i = 0; i < n; ++i) B(i, j) = out.E_basis[j][i];
    Eigen::FullPivLU<Eigen::MatrixXd> lu(B.transpose());
    Eigen::MatrixXd K = lu.kernel();
    std::vector<std::vector<double>> comp;
    for (int j = 0; j < K.cols(); ++j) {
      std::vector<double> v(n);
      for (int i = 0; i < n; ++i) v[i] = K(i, j);
      comp.push_back(std::move(v));
    }
    comp = orthonormalize(comp, n);
    if (!sphere_confirm(comp, /*expect_max=*/false))
      throw SolverError("classify: V restricted to the complement of E has no strict local min at 0");
  }
  return out;
}

RadiusSelection select_radius_R1(const PotentialSpec& spec,
                                 std::span<const double> candidates,
                                 const RadiusOptions& opts) {
  RadiusSelection sel;
  int n = spec.dim;
  for (double R : candidates) {
    bool ok = true;
    RadiusSelection::Rejection worst{R, 0.0, std::numeric_limits<double>::infinity()};
    auto probe = [&](std::span<const double> x, double angle) {
      double v = spec.value(x);
      if (std::abs(v - 1.0) >= opts.tol_level) return;
      auto g = spec.gradient(x);
      double gx = 0.0, R2 = sq_norm(x);
      for (int i = 0; i < n; ++i) gx += g[i] * x[i];
      double tang_sq = 0.0;
      for (int i = 0; i < n; ++i) {
        double t = g[i] - gx * x[i] / R2;
        tang_sq += t * t;
      }
      double tang = std::sqrt(tang_sq);
      if (tang <= opts.tol_tang) {
        ok = false;
        if (tang < worst.tangential) worst = {R, angle, tang};
      }
    };
    if (n == 2) {
      for (int j = 0; j < opts.n_angles; ++j) {
        double th = 2.0 * M_PI * j / opts.n_angles;
        double x[2] = {R * std::cos(th), R * std::sin(th)};
        probe(std::span<const double>(x, 2), th);
      }
    } else {
      std::mt19937_64 rng(0xcafef00dULL);
      std::normal_distribution<double> gauss;
      for (int j = 0; j < opts.n_angles; ++j) {
        std::vector<double> x(n);
        double nrm = 0.0;
        for (auto& xi : x) {
          xi = gauss(rng);
          nrm += xi * xi;
        }
        nrm = std::sqrt(nrm);
        for (auto& xi : x) xi *= R / nrm;
        probe(x, static_cast<double>(j));
      }
    }
    if (ok) {
      sel.radius = R;
      sel.found = true;
      return sel;
    }
    sel.rejected.push_back(worst);
  }
  return sel;
}

BoundsReport check_V0(const PotentialSpec& spec, double box_halfwidth,
                      int samples_per_axis) {
  BoundsReport rep;
  rep.observed_min = std::numeric_limits<double>::infinity();
  rep.observed_max = -std::numeric_limits<double>::infinity();
  double a1 = spec.alpha1(), a2 = spec.alpha2();
  const double slack = 1e-12;

  auto visit = [&](std::span<const double> x) {
    double v = spec.value(x);
    rep.observed_min = std::min(rep.observed_min, v);
    rep.observed_max = std::max(rep.observed_max, v);
    if (rep.ok && (v <= 0.0 || v < a1 - slack || v > a2 + slack)) {
      rep.ok = false;
      rep.violating_point.assign(x.begin(), x.end());
    }
  };

  int n = spec.dim;
  if (n <= 3) {
    std::vector<int> idx(n, 0);
    std::vector<double> x(n);
    while (true) {
      for (int i = 0; i < n; ++i)
        x[i] = -box_halfwidth + 2.0 * box_halfwidth * idx[i] / (samples_per_axis - 1);
      visit(x);
      int i = 0;
      while (i < n && ++idx[i] == samples_per_axis) idx[i++] = 0;
      if (i == n) break;
    }
  } else {
    std::mt19937_64 rng(0xb0b0b0b0ULL);
    std::uniform_real_distribution<double> uni(-box_halfwidth, box_halfwidth);
    std::vector<double> x(n);
    long total = 1;
    for (int i = 0; i < n; ++i) total *= samples_per_axis;
    for (long j = 0; j < total; ++j) {
      for (auto& xi : x) xi = uni(rng);
      visit(x);
    }
  }
  return rep;
}

}  // namespace spikelab

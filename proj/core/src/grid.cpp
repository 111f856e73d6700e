#include "spikelab/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "krylov.hpp"
#include "spikelab/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "field dumps assume a little-endian host");

namespace spikelab {

void GridField::zero_boundary() {
  for (int j = 0; j < n; ++j) {
    at(0, j) = 0.0;
    at(n - 1, j) = 0.0;
  }
  for (int i = 0; i < n; ++i) {
    at(i, 0) = 0.0;
    at(i, n - 1) = 0.0;
  }
}

double GridField::min_value() const {
  double m = std::numeric_limits<double>::infinity();
  for (double x : v) m = std::min(m, x);
  return m;
}

double GridField::max_value() const {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  return m;
}

EpsProblem::EpsProblem(double eps, NonlinearitySpec nl, TruncationParams trunc,
                       PotentialSpec pot, CriticalPointClass cpc, GridGeometry geom)
    : eps_(eps),
      nl_(std::move(nl)),
      trunc_(std::move(trunc)),
      pot_(std::move(pot)),
      cpc_(std::move(cpc)),
      tn_(nl_, trunc_.slope(nl_.mu)) {
  if (!(eps_ > 0.0)) throw ConfigError("grid: eps must be positive");
  if (pot_.dim != 2) throw ConfigError("grid: the grid solver is two-dimensional");
  nl_.validate(2);
  trunc_.validate(nl_.mu);
  L_ = trunc_.radii[4] / eps_ + geom.L_margin;
  n_ = geom.h_target > 0.0
           ? std::max(64, static_cast<int>(std::lround(2.0 * L_ / geom.h_target)) + 1)
           : geom.n;
  if (n_ < 16) throw ConfigError("grid: n must be at least 16");

  const int n = n_;
  v_grid_.resize(n * n);
  chi_grid_.resize(n * n);
  h_grid_.assign(cpc_.E_basis.size(), std::vector<double>(n * n, 0.0));
  double h = this->h();
  double R3_eps = trunc_.radii[3] / eps_;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double x0 = -L_ + i * h, x1 = -L_ + j * h;
      double xe[2] = {eps_ * x0, eps_ * x1};
      v_grid_[i * n + j] = pot_.value(std::span<const double>(xe, 2));
      double rho = std::hypot(x0, x1);
      chi_grid_[i * n + j] = chi_radial(trunc_, eps_ * rho);
      if (rho <= R3_eps) {
        for (std::size_t k = 0; k < cpc_.E_basis.size(); ++k)
          h_grid_[k][i * n + j] =
              cpc_.E_basis[k][0] * x0 + cpc_.E_basis[k][1] * x1;
      }
    }
  }
}

EpsProblem EpsProblem::autonomous(double k, double eps, NonlinearitySpec nl,
                                  TruncationParams trunc, CriticalPointClass cpc,
                                  GridGeometry geom) {
  PotentialSpec flat;
  flat.kind = PotentialSpec::Kind::gaussian_max;
  flat.dim = 2;
  flat.beta = 1e-300;  // placeholder; the cached grids below are the authority
  EpsProblem p(eps, std::move(nl), std::move(trunc), flat, std::move(cpc), geom);
  std::fill(p.v_grid_.begin(), p.v_grid_.end(), k);
  std::fill(p.chi_grid_.begin(), p.chi_grid_.end(), 1.0);
  return p;
}

namespace {

void check_geometry(const EpsProblem& p, const GridField& u) {
  if (u.n != p.n() || u.L != p.L())
    throw ConfigError("grid: field does not match the problem geometry");
}

double multiplier_weight(const EpsProblem& p, std::span<const double> lambda,
                         int i, int j) {
  double w = 0.0;
  for (std::size_t k = 0; k < lambda.size(); ++k)
    w += lambda[k] * p.h_weight(static_cast<int>(k), i, j);
  return w;
}

}  // namespace

double energy(const EpsProblem& p, const GridField& u) {
  return energy(p, u, {});
}

double energy(const EpsProblem& p, const GridField& u, std::span<const double> lambda) {
  check_geometry(p, u);
  const int n = u.n;
  const double h = u.h();
  const auto& tn = p.truncated();
  double grad_acc = 0.0;
  for (int i = 0; i + 1 < n; ++i)
    for (int j = 0; j < n; ++j) {
      double d = u.at(i + 1, j) - u.at(i, j);
      grad_acc += d * d;
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j + 1 < n; ++j) {
      double d = u.at(i, j + 1) - u.at(i, j);
      grad_acc += d * d;
    }
  double node_acc = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = u.at(i, j);
      double pot = p.v_at(i, j);
      if (!lambda.empty()) pot -= multiplier_weight(p, lambda, i, j);
      node_acc += 0.5 * pot * s * s - tn.G(p.chi_at(i, j), s);
    }
  return 0.5 * grad_acc + h * h * node_acc;
}

GridField gradient(const EpsProblem& p, const GridField& u) {
  return gradient(p, u, {});
}

GridField gradient(const EpsProblem& p, const GridField& u, std::span<const double> lambda) {
  check_geometry(p, u);
  const int n = u.n;
  const double inv_h2 = 1.0 / (u.h() * u.h());
  const auto& tn = p.truncated();
  GridField r = GridField::zeros(n, u.L);
  for (int i = 1; i + 1 < n; ++i) {
    for (int j = 1; j + 1 < n; ++j) {
      double s = u.at(i, j);
      double lap = (4.0 * s - u.at(i - 1, j) - u.at(i + 1, j) - u.at(i, j - 1) -
                    u.at(i, j + 1)) * inv_h2;
      double pot = p.v_at(i, j);
      if (!lambda.empty()) pot -= multiplier_weight(p, lambda, i, j);
      r.at(i, j) = lap + pot * s - tn.g(p.chi_at(i, j), s);
    }
  }
  return r;
}

GridField gradient_plain(const EpsProblem& p, const GridField& u) {
  check_geometry(p, u);
  const int n = u.n;
  const double inv_h2 = 1.0 / (u.h() * u.h());
  const auto& nl = p.nonlinearity();
  GridField r = GridField::zeros(n, u.L);
  for (int i = 1; i + 1 < n; ++i) {
    for (int j = 1; j + 1 < n; ++j) {
      double s = u.at(i, j);
      double lap = (4.0 * s - u.at(i - 1, j) - u.at(i + 1, j) - u.at(i, j - 1) -
                    u.at(i, j + 1)) * inv_h2;
      r.at(i, j) = lap + p.v_at(i, j) * s - nl.f(s);
    }
  }
  return r;
}

namespace {

// Apply the symmetric linearization -Lap5 + V - d_s g - lambda.h at state u.
struct JacobianApply {
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
        if (!lambda.empty()) pot -= multiplier_weight(p, lambda, i, j);
        out[id] = lap + pot * w[id];
      }
    }
  }
};

double l2_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

GridField newton_solve(const EpsProblem& p, GridField seed, double tol,
                       int max_iter, NewtonReport* report) {
  check_geometry(p, seed);
  seed.zero_boundary();
  GridField u = std::move(seed);
  const int minres_cap = std::min(20000, std::max(1500, 8 * u.n));
  NewtonReport rep;
  double rsup0 = 0.0;
  for (int it = 0; it <= max_iter; ++it) {
    GridField r = gradient(p, u);
    double rsup = sup_norm(r);
    if (it == 0) rsup0 = std::max(rsup, 1.0);
    rep.iterations = it;
    rep.residual_sup = rsup;
    if (!std::isfinite(rsup)) throw SolverError("newton: residual diverged");
    if (rsup < tol) {
      rep.converged = true;
      break;
    }
    if (it == max_iter) break;

    JacobianApply J{p, u, {}};
    std::vector<double> rhs(r.v);
    for (auto& x : rhs) x = -x;
    // Forcing term: tight solves buy nothing once the remaining residual sits
    // in the near-null translation modes, so floor the inner tolerance.
    double inner_tol = std::clamp(0.1 * rsup / rsup0, 1e-6, 1e-2);
    std::vector<double> d = detail::minres(J, rhs, inner_tol, minres_cap);

    double r0 = l2_of(r.v);
    double step = 1.0;
    GridField trial = u;
    for (int bt = 0; bt < 12; ++bt) {
      for (std::size_t i = 0; i < u.v.size(); ++i) trial.v[i] = u.v[i] + step * d[i];
      GridField rt = gradient(p, trial);
      if (l2_of(rt.v) < (1.0 - 1e-4 * step) * r0) break;
      step *= 0.5;
    }
    for (std::size_t i = 0; i < u.v.size(); ++i) u.v[i] += step * d[i];
  }
  if (report) *report = rep;
  if (!rep.converged)
    throw SolverError("newton: no convergence within iteration cap (residual " +
                      std::to_string(rep.residual_sup) + ")");
  return u;
}

std::vector<double> barycenter(const EpsProblem& p, const GridField& u) {
  check_geometry(p, u);
  const int n = u.n;
  double den = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) den += u.at(i, j) * u.at(i, j);
  if (den == 0.0)
    throw SolverError("barycenter: undefined on the zero field");
  std::vector<double> num(p.dim_E(), 0.0);
  for (int k = 0; k < p.dim_E(); ++k) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        acc += p.h_weight(k, i, j) * u.at(i, j) * u.at(i, j);
    num[k] = acc / den;
  }
  return num;
}

double l2_norm(const GridField& u) {
  double s = 0.0;
  for (double x : u.v) s += x * x;
  return u.h() * std::sqrt(s);
}

double h1_norm(const GridField& u) {
  const int n = u.n;
  double grad_acc = 0.0;
  for (int i = 0; i + 1 < n; ++i)
    for (int j = 0; j < n; ++j) {
      double d = u.at(i + 1, j) - u.at(i, j);
      grad_acc += d * d;
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j + 1 < n; ++j) {
      double d = u.at(i, j + 1) - u.at(i, j);
      grad_acc += d * d;
    }
  double l2 = l2_norm(u);
  return std::sqrt(grad_acc + l2 * l2);
}

double sup_norm(const GridField& u) {
  double m = 0.0;
  for (double x : u.v) m = std::max(m, std::abs(x));
  return m;
}

double inner_product(const GridField& a, const GridField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.v.size(); ++i) s += a.v[i] * b.v[i];
  return a.h() * a.h() * s;
}

GridField translate(const GridField& u, int di, int dj) {
  GridField out = GridField::zeros(u.n, u.L);
  for (int i = 0; i < u.n; ++i) {
    int si = i - di;
    if (si < 0 || si >= u.n) continue;
    for (int j = 0; j < u.n; ++j) {
      int sj = j - dj;
      if (sj < 0 || sj >= u.n) continue;
      out.at(i, j) = u.at(si, sj);
    }
  }
  out.zero_boundary();
  return out;
}

GridField interpolate_radial(const RadialProfile& profile, int n, double L,
                             std::array<double, 2> center, double amplitude,
                             double dilation) {
  GridField out = GridField::zeros(n, L);
  double h = out.h();
  for (int i = 0; i < n; ++i) {
    double x0 = -L + i * h - center[0];
    for (int j = 0; j < n; ++j) {
      double x1 = -L + j * h - center[1];
      double rho = std::hypot(x0, x1) / dilation;
      out.at(i, j) = amplitude * profile.value_at(rho);
    }
  }
  out.zero_boundary();
  return out;
}

void write_field(const std::string& path_base, const GridField& u, double eps,
                 const std::string& description) {
  {
    std::ofstream raw(path_base + ".f64", std::ios::binary);
    if (!raw) throw ConfigError("cannot open " + path_base + ".f64 for writing");
    raw.write(reinterpret_cast<const char*>(u.v.data()),
              static_cast<std::streamsize>(u.v.size() * sizeof(double)));
  }
  nlohmann::json side{{"n", u.n}, {"L", u.L}, {"eps", eps}, {"description", description}};
  std::ofstream js(path_base + ".json");
  if (!js) throw ConfigError("cannot open " + path_base + ".json for writing");
  js << side.dump(2) << "\n";
}

GridField read_field(const std::string& path_base) {
  std::ifstream js(path_base + ".json");
  if (!js) throw ConfigError("cannot open " + path_base + ".json");
  nlohmann::json side = nlohmann::json::parse(js);
  GridField u = GridField::zeros(side.at("n").get<int>(), side.at("L").get<double>());
  std::ifstream raw(path_base + ".f64", std::ios::binary);
  if (!raw) throw ConfigError("cannot open " + path_base + ".f64");
  raw.read(reinterpret_cast<char*>(u.v.data()),
           static_cast<std::streamsize>(u.v.size() * sizeof(double)));
  if (raw.gcount() != static_cast<std::streamsize>(u.v.size() * sizeof(double)))
    throw ConfigError("field dump " + path_base + ".f64 is truncated");
  return u;
}

void write_center_slice_csv(const std::string& path, const GridField& u) {
  int bi = 0, bj = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < u.n; ++i)
    for (int j = 0; j < u.n; ++j)
      if (u.at(i, j) > best) {
        best = u.at(i, j);
        bi = i;
        bj = j;
      }
  (void)bi;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  out << "x,u\n";
  out.precision(17);
  for (int i = 0; i < u.n; ++i)
    out << u.coord(i, bj)[0] << "," << u.at(i, bj) << "\n";
}

}  // namespace spikelab

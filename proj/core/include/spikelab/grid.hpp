#pragma once

#include <array>
#include <string>
#include <vector>

#include "spikelab/limit_problem.hpp"
#include "spikelab/nonlinearity.hpp"
#include "spikelab/potential.hpp"

namespace spikelab {

// Uniform n x n grid on [-L, L]^2 with homogeneous Dirichlet boundary.
// Row-major storage; node (i, j) sits at (-L + i h, -L + j h), h = 2L/(n-1).
struct GridField {
  int n = 0;
  double L = 0.0;
  std::vector<double> v;

  static GridField zeros(int n, double L) { return {n, L, std::vector<double>(n * n, 0.0)}; }

  double h() const { return 2.0 * L / (n - 1); }
  double& at(int i, int j) { return v[i * n + j]; }
  double at(int i, int j) const { return v[i * n + j]; }
  std::array<double, 2> coord(int i, int j) const {
    double h_ = h();
    return {-L + i * h_, -L + j * h_};
  }
  bool same_geometry(const GridField& o) const { return n == o.n && L == o.L; }

  void zero_boundary();
  double min_value() const;
  double max_value() const;
};

// Rescaled, truncated problem on the grid: -Lap u + V(eps x) u = g_eps(x, u).
// Caches the potential, the cutoff and the barycenter weights at the nodes.
class EpsProblem {
public:
  struct GridGeometry {
    int n = 256;           // points per dimension (used when h_target == 0)
    double h_target = 0.0; // when > 0, n is derived so the spacing is ~h_target
    double L_margin = 8.0; // box half-width is R4/eps + L_margin
  };

  EpsProblem(double eps, NonlinearitySpec nl, TruncationParams trunc,
             PotentialSpec pot, CriticalPointClass cpc, GridGeometry geom);

  // Autonomous baseline on the same geometry: V identically k, cutoff
  // identically 1 (so the nonlinearity is plain f), barycenter window as
  // usual.  Used to measure the grid-level ground-state energy.
  static EpsProblem autonomous(double k, double eps, NonlinearitySpec nl,
                               TruncationParams trunc, CriticalPointClass cpc,
                               GridGeometry geom);

  double eps() const { return eps_; }
  int n() const { return n_; }
  double L() const { return L_; }
  double h() const { return 2.0 * L_ / (n_ - 1); }
  int dim_E() const { return static_cast<int>(cpc_.E_basis.size()); }

  const NonlinearitySpec& nonlinearity() const { return nl_; }
  const TruncationParams& truncation() const { return trunc_; }
  const PotentialSpec& potential() const { return pot_; }
  const CriticalPointClass& critical_point() const { return cpc_; }
  const TruncatedNonlinearity& truncated() const { return tn_; }

  double v_at(int i, int j) const { return v_grid_[i * n_ + j]; }
  double chi_at(int i, int j) const { return chi_grid_[i * n_ + j]; }
  double h_weight(int k, int i, int j) const { return h_grid_[k][i * n_ + j]; }

  GridField zeros() const { return GridField::zeros(n_, L_); }

private:
  double eps_;
  NonlinearitySpec nl_;
  TruncationParams trunc_;
  PotentialSpec pot_;
  CriticalPointClass cpc_;
  TruncatedNonlinearity tn_;
  int n_;
  double L_;
  std::vector<double> v_grid_, chi_grid_;
  std::vector<std::vector<double>> h_grid_;  // pi_E components * B3 indicator
};

// Truncated energy: 1/2 int |grad u|^2 + 1/2 int V(eps x) u^2 - int G_eps(x, u),
// forward-difference gradient stencil plus nodal quadrature, fixed summation
// order for run-to-run reproducibility.
double energy(const EpsProblem& p, const GridField& u);

// With the multiplier term -(lambda . h_eps(x)) u in the potential part.
double energy(const EpsProblem& p, const GridField& u, std::span<const double> lambda);

// Residual field -Lap5 u + V(eps x) u - g_eps(x, u) (zero rows on the
// boundary).  This is the exact nodal gradient of energy() divided by h^2.
GridField gradient(const EpsProblem& p, const GridField& u);
GridField gradient(const EpsProblem& p, const GridField& u, std::span<const double> lambda);

// Residual of the plain (untruncated) equation -Lap u + V(eps x) u - f(u).
GridField gradient_plain(const EpsProblem& p, const GridField& u);

struct NewtonReport {
  int iterations = 0;
  double residual_sup = 0.0;
  bool converged = false;
};

// Damped Newton with MINRES inner solves on the symmetric linearization
// -Lap + V(eps x) - d_s g_eps(x, u).  Seeds outside any basin diverge; the
// zero field is a fixed point and is returned as such.
GridField newton_solve(const EpsProblem& p, GridField seed, double tol,
                       int max_iter, NewtonReport* report = nullptr);

// Barycenter in E-coordinates: int h_eps(x) u^2 / int u^2, with
// h_eps(x) = pi_E(x) restricted to |x| <= R3/eps.  Throws on a zero field.
std::vector<double> barycenter(const EpsProblem& p, const GridField& u);

double l2_norm(const GridField& u);
double h1_norm(const GridField& u);
double sup_norm(const GridField& u);
double inner_product(const GridField& a, const GridField& b);  // h^2 sum a b

// Shift by whole lattice steps with zero fill.
GridField translate(const GridField& u, int di, int dj);

// amplitude * profile(|x - center| / dilation) sampled on the grid, zero
// outside the profile support, Dirichlet boundary enforced.
GridField interpolate_radial(const RadialProfile& profile, int n, double L,
                             std::array<double, 2> center, double amplitude = 1.0,
                             double dilation = 1.0);

// Raw little-endian f64 dump with a JSON sidecar {n, L, eps, description}.
void write_field(const std::string& path_base, const GridField& u, double eps,
                 const std::string& description);
GridField read_field(const std::string& path_base);

// CSV export of the row through the field maximum (x, u(x, y_max)).
void write_center_slice_csv(const std::string& path, const GridField& u);

}  // namespace spikelab

#pragma once

#include <span>
#include <utility>
#include <vector>

#include "spikelab/nonlinearity.hpp"

namespace spikelab {

// Radial solution profile of -U'' - (dim-1)/r U' + k U = f(U) on a uniform
// grid over [0, r_max].  Values are positive, strictly decreasing, and decay
// below 1e-8 * U(0) at r_max.
struct RadialProfile {
  double r_max = 0.0;
  int n_points = 0;
  int dim = 2;
  double k = 1.0;
  std::vector<double> values;  // U(r_i)
  std::vector<double> derivs;  // U'(r_i)

  double dr() const { return r_max / (n_points - 1); }

  // Cubic interpolation on the uniform grid (even extension at 0, zero
  // extension beyond r_max).
  double value_at(double rho) const;
};

struct GroundState {
  RadialProfile profile;
  double energy = 0.0;        // m_k = Phi_k(U)
  double grad_norm_sq = 0.0;  // |grad U|_{L2}^2
  double l2_norm_sq = 0.0;    // |U|_{L2}^2
  double F_integral = 0.0;    // int F(U)
  double fU_integral = 0.0;   // int f(U) U
  double decay_rate = 0.0;    // fitted far-field rate, ~ sqrt(k)
  double u0 = 0.0;            // shooting amplitude U(0)
};

struct ShootingOptions {
  double r_max = 0.0;       // 0 selects 20/sqrt(k)
  int n_points = 4096;
  double ode_rel_tol = 1e-13;
  double ode_abs_tol_scale = 1e-13;  // times U(0)
  int max_bisection = 300;
  double graft_trigger = 1e-5;       // switch to the asymptotic tail below this * U(0)
};

// Shooting + bisection on U(0).  Overshoot: U crosses zero; undershoot: U'
// turns positive.  The returned state is checked against the Pohozaev and
// Nehari identities at relative tolerance tol.
GroundState solve_ground_state(double k, const NonlinearitySpec& spec, int dim,
                               double tol = 1e-6, const ShootingOptions& opts = {});

// Phi_k(u) = 1/2 |grad u|^2 + k/2 |u|^2 - int F(u), radial quadrature with
// surface weight.
double energy_phi(double k, const NonlinearitySpec& spec, const RadialProfile& profile);
double energy_phi(double k, const NonlinearitySpec& spec, const GroundState& state);

// |(dim-2)/2 G + k dim/2 L - dim int F| / (k dim/2 L)
double pohozaev_residual(const GroundState& state);
// |G + k L - int fU| / (G + k L)
double nehari_residual(const GroundState& state);

// Simpson quadrature of w(r) r^{dim-1} dr times the unit-sphere surface
// measure, on a uniform radial grid.
double radial_integral(std::span<const double> w, double dr, int dim);
double sphere_surface(int dim);

// Mountain-pass path through the ground state, parametrized on [0, 1].
// Points are dilated rescalings gamma_t = amplitude * U(. / dilation):
//   dim >= 3: pure dilation up to theta, vertex at 0;
//   dim == 2: amplitude ramp to U_{tau0}, dilation from tau0 to tau1,
//             amplitude ramp from U_{tau1} up to tau2 * U_{tau1}.
// The endpoint parameter is root-found so the endpoint energy sits strictly
// below -m/2; the path maximum equals m at the ground state.
struct CurvePoint {
  double amplitude = 0.0;
  double dilation = 1.0;
};

struct MPCurve {
  int dim = 2;
  double k = 1.0;
  double theta = 0.0;                 // dim >= 3
  double tau0 = 0.0, tau1 = 0.0, tau2 = 0.0;  // dim == 2
  double t_peak = 0.0;                // parameter of the energy maximum

  // cached base-state integrals for closed-form path energies
  double grad_sq = 0.0, l2_sq = 0.0;
  std::vector<double> exponents, coefficients, power_moments;  // int U^{q_i + 1}

  CurvePoint at(double t) const;
  double energy_of(const CurvePoint& p) const;
  double energy_at(double t) const { return energy_of(at(t)); }
  double max_energy(int n_grid = 2001) const;
};

MPCurve build_mp_curve(const GroundState& state, const NonlinearitySpec& spec,
                       double tau0 = 0.5, double tau1 = 2.0);

// Per-k ground-state levels, sorted in k.
std::vector<std::pair<double, double>> m_curve(std::span<const double> k_values,
                                               const NonlinearitySpec& spec, int dim,
                                               double tol = 1e-6,
                                               const ShootingOptions& opts = {});

}  // namespace spikelab

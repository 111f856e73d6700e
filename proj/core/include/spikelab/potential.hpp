#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace spikelab {

// Bounded analytic potential with V(0) = 1 and a critical point at 0.
// Built-in families are of the form V(x) = 1 + beta * P(x) * exp(-|x|^2)
// with P a polynomial, so gradients, Hessians and the bounds alpha1/alpha2
// are exact.
//
//   gaussian_saddle:        P = x2^2 - x1^2          (nondegenerate saddle)
//   gaussian_max:           P = -|x|^2               (nondegenerate maximum)
//   custom_polynomial_bump: user monomial list       (degenerate experiments)
struct PotentialSpec {
  enum class Kind { gaussian_saddle, gaussian_max, custom_polynomial_bump };

  struct Monomial {
    double coefficient = 0.0;
    std::vector<int> powers;  // one entry per coordinate, total degree >= 2
  };

  Kind kind = Kind::gaussian_saddle;
  int dim = 2;
  double beta = 0.3;
  std::vector<Monomial> monomials;  // custom_polynomial_bump only

  // Certified bounds 0 < alpha1 <= V <= alpha2 (closed form for the built-in
  // kinds, 1D extremization of the monomial envelope for custom).
  double alpha1() const;
  double alpha2() const;

  void validate() const;  // throws ConfigError

  double value(std::span<const double> x) const;
  std::vector<double> gradient(std::span<const double> x) const;
  std::vector<double> hessian(std::span<const double> x) const;  // row-major dim x dim
};

// Classification of the critical point at 0.
//   V1: isolated local maximum (E = R^dim)
//   V2: nondegenerate saddle   (E = negative eigenspace of the Hessian)
//   V3: degenerate, user-supplied E confirmed by sphere sampling
struct CriticalPointClass {
  enum class Case : std::uint8_t { V1, V2, V3 };

  Case tag = Case::V2;
  std::vector<std::vector<double>> E_basis;  // orthonormal, each of length dim
  std::vector<double> hessian_eigenvalues;

  int dim_E() const { return static_cast<int>(E_basis.size()); }
  std::string tag_name() const;
};

struct ClassifyOptions {
  double tol = 1e-10;               // |eigenvalue| below this counts as degenerate
  double sphere_radius = 1e-2;      // sampling radius for the V3 max/min split
  int sphere_samples = 4096;
  std::vector<std::vector<double>> user_E;  // required for degenerate Hessians
};

CriticalPointClass classify_critical_point(const PotentialSpec& spec,
                                           const ClassifyOptions& opts = {});

// Level-set transversality scan: accepts the first candidate radius R such
// that every sampled point of the sphere |x| = R with |V(x) - 1| < tol_level
// has tangential derivative magnitude > tol_tang.
struct RadiusSelection {
  double radius = 0.0;
  bool found = false;
  // per-candidate diagnostics of the worst sampled violation
  struct Rejection {
    double radius;
    double angle;      // offending angle (dim 2) or sample index
    double tangential; // |tangential derivative| there
  };
  std::vector<Rejection> rejected;
};

struct RadiusOptions {
  double tol_level = 1e-6;
  double tol_tang = 1e-4;
  int n_angles = 4096;
};

RadiusSelection select_radius_R1(const PotentialSpec& spec,
                                 std::span<const double> candidates,
                                 const RadiusOptions& opts = {});

// Box sampling of the bound alpha1 <= V <= alpha2.
struct BoundsReport {
  bool ok = true;
  double observed_min = 0.0;
  double observed_max = 0.0;
  std::vector<double> violating_point;
};

BoundsReport check_V0(const PotentialSpec& spec, double box_halfwidth,
                      int samples_per_axis);

}  // namespace spikelab

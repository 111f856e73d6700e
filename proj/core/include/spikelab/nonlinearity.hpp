#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace spikelab {

// Superlinear nonlinearity f(s) = sum_i c_i s^{q_i} for s >= 0, extended by 0
// for s < 0.  Positive power combinations keep the primitive F, the derivative
// f' and the truncation crossover in closed form.
//
// mu is the superlinearity exponent witnessing 0 < mu*F(s) <= s*f(s) (equality
// only for a pure power with mu = q+1); p is the growth witness for the bound
// |f(s)| <= delta*|s| + C_delta*|s|^p.
struct NonlinearitySpec {
  enum class Kind { pure_power, sum_of_powers };

  Kind kind = Kind::pure_power;
  std::vector<double> exponents;     // q_i > 1, subcritical when dim >= 3
  std::vector<double> coefficients;  // c_i > 0
  double mu = 3.0;                   // in (2, min_i q_i + 1]
  double p = 3.0;                    // growth witness, >= max_i q_i

  static NonlinearitySpec pure_power(double q, double coefficient = 1.0,
                                     double mu = 0.0, double p = 0.0);
  static NonlinearitySpec sum_of_powers(std::vector<double> exponents,
                                        std::vector<double> coefficients,
                                        double mu = 0.0, double p = 0.0);

  // Throws ConfigError naming the violated rule.  dim is the space dimension
  // used for the subcriticality bound q < (dim+2)/(dim-2).
  void validate(int dim) const;

  double f(double s) const;       // 0 for s < 0
  double F(double s) const;       // exact antiderivative, F(0) = 0
  double fprime(double s) const;  // one-sided derivative, 0 for s < 0
};

// Truncation data: slope a with 0 < a < (1 - 2/mu)*alpha1, and the nested
// radii R0 < R1 < R2 < R3 < R4 of the balls used by the cutoff and the
// barycenter window.
struct TruncationParams {
  double a = 0.0;                     // 0 means "use default_slope"
  std::array<double, 5> radii{0.45, 0.6, 0.75, 0.9, 1.05};
  double alpha1 = 1.0;                // lower potential bound backing the slope rule

  static double default_slope(double mu, double alpha1) {
    return 0.9 * (1.0 - 2.0 / mu) * alpha1;
  }

  double slope(double mu) const { return a > 0.0 ? a : default_slope(mu, alpha1); }

  void validate(double mu) const;  // throws ConfigError
};

// Spatial cutoff: 1 on |x| <= R1, linear ramp down to 0 at R2, 0 outside.
double chi_radial(const TruncationParams& tp, double rho);
double chi_eval(const TruncationParams& tp, std::span<const double> x);

// Largest r > 0 with min{f(s), a*s} = f(s) on (0, r).  Closed form a^{1/(q-1)}
// for a unit pure power; bisection on f(s) - a*s otherwise.  Throws
// SolverError if no positive crossover exists.
double crossover_threshold(const NonlinearitySpec& spec, double a);

double ftilde_eval(const NonlinearitySpec& spec, double a, double s);
double Ftilde_eval(const NonlinearitySpec& spec, double a, double s);

// g(x,s) = chi(x) f(s) + (1-chi(x)) ftilde(s), and its primitive G.
// The eps-scaled variants evaluate the cutoff at eps*x.
double g_eval(const NonlinearitySpec& spec, const TruncationParams& tp,
              std::span<const double> x, double s);
double G_eval(const NonlinearitySpec& spec, const TruncationParams& tp,
              std::span<const double> x, double s);
double g_eps_eval(const NonlinearitySpec& spec, const TruncationParams& tp,
                  double eps, std::span<const double> x, double s);
double G_eps_eval(const NonlinearitySpec& spec, const TruncationParams& tp,
                  double eps, std::span<const double> x, double s);

// Precomputed truncation state for hot loops: caches the crossover and the
// primitive value there, and evaluates g/G from the cutoff value directly.
// When the f-branch is active the result is bit-identical to a plain f(s)
// call (no blend arithmetic), which makes untruncation checks exact.
class TruncatedNonlinearity {
public:
  TruncatedNonlinearity(NonlinearitySpec spec, double slope);

  const NonlinearitySpec& spec() const { return spec_; }
  double slope() const { return slope_; }
  double crossover() const { return crossover_; }

  double f(double s) const { return spec_.f(s); }
  double F(double s) const { return spec_.F(s); }
  double fprime(double s) const { return spec_.fprime(s); }

  double ftilde(double s) const;
  double Ftilde(double s) const;
  double ftilde_prime(double s) const;  // one-sided at the kink

  double g(double chi, double s) const;
  double G(double chi, double s) const;
  double g_prime(double chi, double s) const;  // d/ds, one-sided at the kink

private:
  NonlinearitySpec spec_;
  double slope_;
  double crossover_;
  double F_at_crossover_;
};

// Validated growth constant: smallest grid constant C with
// |f(s)| <= delta*|s| + C*|s|^p on a log grid s in [1e-6, 1e3].
struct GrowthBound {
  double c_delta = 0.0;
  double argmax_s = 0.0;  // sample where the constraint is tight
};
GrowthBound growth_bound_check(const NonlinearitySpec& spec, double delta,
                               int n_samples = 100000);

// Sampled verification of the structural hypotheses on f (superlinearity at 0,
// growth witness, mu-superlinearity).  Returns a human-readable failure
// description, or empty if all pass.
std::string check_hypotheses(const NonlinearitySpec& spec, int dim,
                             int n_samples = 10000);

}  // namespace spikelab

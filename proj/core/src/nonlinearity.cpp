#include "spikelab/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "spikelab/errors.hpp"

namespace spikelab {

namespace {

// s^q with a fast path for small integer exponents (the common cubic/quintic
// cases dominate grid loops).
double pow_pos(double s, double q) {
  int qi = static_cast<int>(q);
  if (static_cast<double>(qi) == q && qi >= 1 && qi <= 8) {
    double r = s;
    for (int i = 1; i < qi; ++i) r *= s;
    return r;
  }
  return std::pow(s, q);
}

}  // namespace

NonlinearitySpec NonlinearitySpec::pure_power(double q, double coefficient,
                                              double mu, double p) {
  NonlinearitySpec spec;
  spec.kind = Kind::pure_power;
  spec.exponents = {q};
  spec.coefficients = {coefficient};
  spec.mu = mu > 0.0 ? mu : std::min(3.0, 0.5 * (q + 3.0));
  spec.p = p > 0.0 ? p : q;
  return spec;
}

NonlinearitySpec NonlinearitySpec::sum_of_powers(std::vector<double> exponents,
                                                 std::vector<double> coefficients,
                                                 double mu, double p) {
  NonlinearitySpec spec;
  spec.kind = Kind::sum_of_powers;
  spec.exponents = std::move(exponents);
  spec.coefficients = std::move(coefficients);
  double qmin = *std::min_element(spec.exponents.begin(), spec.exponents.end());
  double qmax = *std::max_element(spec.exponents.begin(), spec.exponents.end());
  spec.mu = mu > 0.0 ? mu : std::min(3.0, 0.5 * (qmin + 3.0));
  spec.p = p > 0.0 ? p : qmax;
  return spec;
}

void NonlinearitySpec::validate(int dim) const {
  if (exponents.empty() || exponents.size() != coefficients.size())
    throw ConfigError("nonlinearity: exponents and coefficients must be nonempty and match");
  if (kind == Kind::pure_power && exponents.size() != 1)
    throw ConfigError("nonlinearity: pure_power takes exactly one exponent");
  double qmin = std::numeric_limits<double>::infinity();
  double qmax = 0.0;
  for (std::size_t i = 0; i < exponents.size(); ++i) {
    double q = exponents[i];
    if (!(q > 1.0))
      throw ConfigError("nonlinearity: every exponent must satisfy q > 1");
    if (dim >= 3) {
      double qcrit = static_cast<double>(dim + 2) / static_cast<double>(dim - 2);
      if (!(q < qcrit)) {
        std::ostringstream os;
        os << "nonlinearity: exponent " << q << " is not subcritical for dim "
           << dim << " (needs q < " << qcrit << ")";
        throw ConfigError(os.str());
      }
    }
    if (!(coefficients[i] > 0.0))
      throw ConfigError("nonlinearity: coefficients must be positive");
    qmin = std::min(qmin, q);
    qmax = std::max(qmax, q);
  }
  if (!(mu > 2.0) || !(mu <= qmin + 1.0)) {
    std::ostringstream os;
    os << "nonlinearity: mu = " << mu << " must lie in (2, min_i q_i + 1] = (2, "
       << qmin + 1.0 << "]";
    throw ConfigError(os.str());
  }
  if (!(p >= qmax))
    throw ConfigError("nonlinearity: growth witness p must be >= every exponent");
  if (dim >= 3) {
    double qcrit = static_cast<double>(dim + 2) / static_cast<double>(dim - 2);
    if (!(p < qcrit))
      throw ConfigError("nonlinearity: growth witness p must be subcritical for dim >= 3");
  }
}

double NonlinearitySpec::f(double s) const {
  if (s <= 0.0) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < exponents.size(); ++i)
    acc += coefficients[i] * pow_pos(s, exponents[i]);
  return acc;
}

double NonlinearitySpec::F(double s) const {
  if (s <= 0.0) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < exponents.size(); ++i)
    acc += coefficients[i] / (exponents[i] + 1.0) * pow_pos(s, exponents[i] + 1.0);
  return acc;
}

double NonlinearitySpec::fprime(double s) const {
  if (s <= 0.0) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < exponents.size(); ++i)
    acc += coefficients[i] * exponents[i] * pow_pos(s, exponents[i] - 1.0);
  return acc;
}

void TruncationParams::validate(double mu) const {
  double bound = (1.0 - 2.0 / mu) * alpha1;
  double slope_value = slope(mu);
  if (!(slope_value > 0.0) || !(slope_value < bound)) {
    std::ostringstream os;
    os << "truncation: slope a = " << slope_value
       << " violates the slope bound 0 < a < (1 - 2/mu)*alpha1 = " << bound;
    throw ConfigError(os.str());
  }
  for (int i = 0; i < 4; ++i) {
    if (!(radii[i] > 0.0) || !(radii[i] < radii[i + 1]))
      throw ConfigError("truncation: radii must be positive and strictly increasing");
  }
}

double chi_radial(const TruncationParams& tp, double rho) {
  if (rho <= tp.radii[1]) return 1.0;
  if (rho >= tp.radii[2]) return 0.0;
  return (tp.radii[2] - rho) / (tp.radii[2] - tp.radii[1]);
}

double chi_eval(const TruncationParams& tp, std::span<const double> x) {
  double sq = 0.0;
  for (double xi : x) sq += xi * xi;
  return chi_radial(tp, std::sqrt(sq));
}

double crossover_threshold(const NonlinearitySpec& spec, double a) {
  if (!(a > 0.0)) throw SolverError("crossover: slope must be positive");
  if (spec.exponents.size() == 1) {
    double q = spec.exponents[0];
    double c = spec.coefficients[0];
    return c == 1.0 ? std::pow(a, 1.0 / (q - 1.0))
                    : std::pow(a / c, 1.0 / (q - 1.0));
  }
  // f(s)/s is strictly increasing for a positive power sum, so f(s) - a*s has
  // exactly one positive root.
  auto excess = [&](double s) { return spec.f(s) - a * s; };
  double lo = 1.0, hi = 1.0;
  int guard = 0;
  while (excess(lo) > 0.0) {
    lo *= 0.5;
    if (++guard > 2000) throw SolverError("crossover: no positive crossover (f exceeds a*s near 0)");
  }
  guard = 0;
  while (excess(hi) < 0.0) {
    hi *= 2.0;
    if (++guard > 2000) throw SolverError("crossover: slope a exceeds f on all of (0, inf)");
  }
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (excess(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double ftilde_eval(const NonlinearitySpec& spec, double a, double s) {
  if (s <= 0.0) return 0.0;
  return std::min(spec.f(s), a * s);
}

double Ftilde_eval(const NonlinearitySpec& spec, double a, double s) {
  if (s <= 0.0) return 0.0;
  double r = crossover_threshold(spec, a);
  if (s <= r) return spec.F(s);
  return spec.F(r) + 0.5 * a * (s * s - r * r);
}

double g_eval(const NonlinearitySpec& spec, const TruncationParams& tp,
              std::span<const double> x, double s) {
  TruncatedNonlinearity tn(spec, tp.slope(spec.mu));
  return tn.g(chi_eval(tp, x), s);
}

double G_eval(const NonlinearitySpec& spec, const TruncationParams& tp,
              std::span<const double> x, double s) {
  TruncatedNonlinearity tn(spec, tp.slope(spec.mu));
  return tn.G(chi_eval(tp, x), s);
}

double g_eps_eval(const NonlinearitySpec& spec, const TruncationParams& tp,
                  double eps, std::span<const double> x, double s) {
  double sq = 0.0;
  for (double xi : x) sq += xi * xi;
  TruncatedNonlinearity tn(spec, tp.slope(spec.mu));
  return tn.g(chi_radial(tp, eps * std::sqrt(sq)), s);
}

double G_eps_eval(const NonlinearitySpec& spec, const TruncationParams& tp,
                  double eps, std::span<const double> x, double s) {
  double sq = 0.0;
  for (double xi : x) sq += xi * xi;
  TruncatedNonlinearity tn(spec, tp.slope(spec.mu));
  return tn.G(chi_radial(tp, eps * std::sqrt(sq)), s);
}

TruncatedNonlinearity::TruncatedNonlinearity(NonlinearitySpec spec, double slope)
    : spec_(std::move(spec)),
      slope_(slope),
      crossover_(crossover_threshold(spec_, slope)),
      F_at_crossover_(spec_.F(crossover_)) {}

double TruncatedNonlinearity::ftilde(double s) const {
  if (s <= 0.0) return 0.0;
  return std::min(spec_.f(s), slope_ * s);
}

double TruncatedNonlinearity::Ftilde(double s) const {
  if (s <= 0.0) return 0.0;
  if (s <= crossover_) return spec_.F(s);
  return F_at_crossover_ + 0.5 * slope_ * (s * s - crossover_ * crossover_);
}

double TruncatedNonlinearity::ftilde_prime(double s) const {
  if (s <= 0.0) return 0.0;
  return spec_.f(s) <= slope_ * s ? spec_.fprime(s) : slope_;
}

double TruncatedNonlinearity::g(double chi, double s) const {
  if (s <= 0.0) return 0.0;
  double fv = spec_.f(s);
  if (chi >= 1.0) return fv;
  double fts = slope_ * s;
  if (fv <= fts) return fv;  // f-branch active: identical to the untruncated value
  if (chi <= 0.0) return fts;
  return chi * fv + (1.0 - chi) * fts;
}

double TruncatedNonlinearity::G(double chi, double s) const {
  if (s <= 0.0) return 0.0;
  double Fv = spec_.F(s);
  if (chi >= 1.0) return Fv;
  if (s <= crossover_) return Fv;
  double Ftv = F_at_crossover_ + 0.5 * slope_ * (s * s - crossover_ * crossover_);
  if (chi <= 0.0) return Ftv;
  return chi * Fv + (1.0 - chi) * Ftv;
}

double TruncatedNonlinearity::g_prime(double chi, double s) const {
  if (s <= 0.0) return 0.0;
  double fpv = spec_.fprime(s);
  if (chi >= 1.0) return fpv;
  if (spec_.f(s) <= slope_ * s) return fpv;
  if (chi <= 0.0) return slope_;
  return chi * fpv + (1.0 - chi) * slope_;
}

GrowthBound growth_bound_check(const NonlinearitySpec& spec, double delta,
                               int n_samples) {
  if (!(delta > 0.0)) throw ConfigError("growth bound: delta must be positive");
  GrowthBound out;
  double lo = std::log(1e-6), hi = std::log(1e3);
  for (int i = 0; i < n_samples; ++i) {
    double s = std::exp(lo + (hi - lo) * i / (n_samples - 1));
    double need = (spec.f(s) - delta * s) / pow_pos(s, spec.p);
    if (need > out.c_delta) {
      out.c_delta = need;
      out.argmax_s = s;
    }
  }
  return out;
}

std::string check_hypotheses(const NonlinearitySpec& spec, int dim, int n_samples) {
  try {
    spec.validate(dim);
  } catch (const ConfigError& e) {
    return e.what();
  }
  std::ostringstream os;
  double lo = std::log(1e-6), hi = std::log(1e3);
  bool pure = spec.exponents.size() == 1;
  bool mu_tight = true;  // mu == q_i + 1 for every term
  for (double q : spec.exponents)
    if (spec.mu < q + 1.0 - 1e-14) mu_tight = false;
  for (int i = 0; i < n_samples; ++i) {
    double s = std::exp(lo + (hi - lo) * i / (n_samples - 1));
    double fs = spec.f(s);
    double Fs = spec.F(s);
    if (!(Fs > 0.0)) {
      os << "F(s) not positive at s = " << s;
      return os.str();
    }
    double slack = s * fs - spec.mu * Fs;
    if (mu_tight && pure) {
      if (std::abs(slack) > 1e-12 * s * fs) {
        os << "mu*F = s*f identity violated at s = " << s;
        return os.str();
      }
    } else if (!(slack > 0.0)) {
      os << "strict mu*F(s) < s*f(s) violated at s = " << s;
      return os.str();
    }
    // superlinearity at 0 / growth witness on the sampled range
    if (s <= 1e-3 && !(fs <= s * spec.f(1e-3) / 1e-3 + 1e-30)) {
      os << "f(s)/s not increasing near 0 at s = " << s;
      return os.str();
    }
  }
  if (spec.f(-1.0) != 0.0 || spec.F(-1.0) != 0.0)
    return "zero extension for s < 0 violated";
  return {};
}

}  // namespace spikelab

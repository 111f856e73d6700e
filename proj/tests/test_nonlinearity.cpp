#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "spikelab/errors.hpp"
#include "spikelab/nonlinearity.hpp"

using namespace spikelab;

namespace {
NonlinearitySpec cubic() { return NonlinearitySpec::pure_power(3.0, 1.0, 3.0, 3.0); }
NonlinearitySpec mixed() {
  return NonlinearitySpec::sum_of_powers({3.0, 5.0}, {0.5, 0.5}, 3.0, 5.0);
}
}  // namespace

TEST_CASE("pure power evaluation") {
  auto nl = cubic();
  CHECK(nl.f(2.0) == doctest::Approx(8.0));
  CHECK(nl.F(2.0) == doctest::Approx(4.0));
  CHECK(nl.fprime(2.0) == doctest::Approx(12.0));
  CHECK(nl.f(-1.0) == 0.0);
  CHECK(nl.F(-1.0) == 0.0);
  CHECK(nl.fprime(-1.0) == 0.0);
}

TEST_CASE("superlinearity identity for the cubic with mu = 3") {
  auto nl = cubic();
  auto gen = oracle::rng(1);
  std::uniform_real_distribution<double> uni(1e-4, 50.0);
  for (int i = 0; i < 1000; ++i) {
    double s = uni(gen);
    CHECK(nl.mu * nl.F(s) == doctest::Approx(0.75 * s * nl.f(s)));
    CHECK(nl.mu * nl.F(s) < s * nl.f(s));
  }
}

TEST_CASE("validation rejects bad specs") {
  CHECK_THROWS_AS(NonlinearitySpec::pure_power(0.9).validate(2), ConfigError);
  CHECK_THROWS_AS(NonlinearitySpec::pure_power(5.0).validate(3), ConfigError);  // critical at dim 3
  auto nl = cubic();
  nl.mu = 2.0;
  CHECK_THROWS_AS(nl.validate(2), ConfigError);
  nl.mu = 4.5;  // above q + 1
  CHECK_THROWS_AS(nl.validate(2), ConfigError);
  nl = cubic();
  nl.p = 2.0;  // below the top exponent
  CHECK_THROWS_AS(nl.validate(2), ConfigError);
  nl = cubic();
  nl.coefficients[0] = -1.0;
  CHECK_THROWS_AS(nl.validate(2), ConfigError);
  CHECK_NOTHROW(mixed().validate(2));
}

TEST_CASE("truncation crossover") {
  auto nl = cubic();
  CHECK(crossover_threshold(nl, 0.25) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(crossover_threshold(nl, 0.04) == doctest::Approx(0.2).epsilon(1e-14));

  // mixed powers: independent bisection oracle on f(s) - a s
  auto nlm = mixed();
  double a = 0.1;
  // exact root of 0.5 r^2 + 0.5 r^4 = 0.1: r = sqrt((sqrt(1.8) - 1) / 2)
  double r_oracle = oracle::bisect([&](double s) { return nlm.f(s) - a * s; }, 1e-6, 10.0);
  CHECK(r_oracle == doctest::Approx(0.41330423812239925).epsilon(1e-12));
  CHECK(crossover_threshold(nlm, a) == doctest::Approx(r_oracle).epsilon(1e-12));
}

TEST_CASE("truncated nonlinearity branches") {
  auto nl = cubic();
  double a = 0.25;
  CHECK(ftilde_eval(nl, a, 0.3) == doctest::Approx(0.027));
  CHECK(ftilde_eval(nl, a, 1.0) == doctest::Approx(0.25));
  CHECK(ftilde_eval(nl, a, -2.0) == 0.0);

  TruncatedNonlinearity tn(nl, a);
  auto gen = oracle::rng(2);
  std::uniform_real_distribution<double> logu(std::log(1e-6), std::log(1e3));
  for (int i = 0; i < 1000; ++i) {
    double s = std::exp(logu(gen));
    double ft = tn.ftilde(s);
    CHECK(ft <= nl.f(s));
    CHECK(ft <= a * s);
    double Ft = tn.Ftilde(s);
    CHECK(Ft <= 0.5 * a * s * s * (1 + 1e-14));
    CHECK(Ft <= nl.F(s) * (1 + 1e-14));
    // primitive consistency: dFtilde/ds = ftilde (central difference)
    double h = 1e-5 * s;
    double d = (tn.Ftilde(s + h) - tn.Ftilde(s - h)) / (2 * h);
    CHECK(d == doctest::Approx(ft).epsilon(1e-6).scale(a * s));
  }
}

TEST_CASE("cutoff chi") {
  TruncationParams tp;
  tp.radii = {0.45, 0.6, 0.75, 0.9, 1.05};
  double x0[2] = {0.0, 0.0};
  CHECK(chi_eval(tp, std::span<const double>(x0, 2)) == 1.0);
  double mid = 0.5 * (tp.radii[1] + tp.radii[2]);
  CHECK(chi_radial(tp, mid) == doctest::Approx(0.5));
  CHECK(chi_radial(tp, tp.radii[2] + 1.0) == 0.0);

  // 1-Lipschitz with constant 1/(R2-R1) on sampled difference quotients
  double lip = 1.0 / (tp.radii[2] - tp.radii[1]);
  auto gen = oracle::rng(3);
  std::uniform_real_distribution<double> uni(0.0, 1.5);
  for (int i = 0; i < 2000; ++i) {
    double r1 = uni(gen), r2 = uni(gen);
    if (r1 == r2) continue;
    CHECK(std::abs(chi_radial(tp, r1) - chi_radial(tp, r2)) <=
          lip * std::abs(r1 - r2) * (1 + 1e-12));
  }
}

TEST_CASE("blended nonlinearity g") {
  auto nl = cubic();
  TruncationParams tp;
  tp.radii = {0.45, 0.6, 0.75, 0.9, 1.05};
  double a = 0.25;
  tp.a = a;
  TruncatedNonlinearity tn(nl, a);
  double r = tn.crossover();

  auto gen = oracle::rng(4);
  std::uniform_real_distribution<double> uni(0.0, 1.5);
  std::uniform_real_distribution<double> logu(std::log(1e-6), std::log(1e3));
  for (int i = 0; i < 1000; ++i) {
    double rho = uni(gen);
    double s = std::exp(logu(gen));
    double x[2] = {rho, 0.0};
    double g = g_eval(nl, tp, std::span<const double>(x, 2), s);
    double G = G_eval(nl, tp, std::span<const double>(x, 2), s);
    if (rho <= tp.radii[1]) CHECK(g == nl.f(s));  // identical arithmetic inside B1
    if (s < r) CHECK(g == nl.f(s));               // identical below the crossover
    if (rho >= tp.radii[2]) CHECK(g == doctest::Approx(tn.ftilde(s)));
    CHECK(G <= nl.F(s) * (1 + 1e-14));

    // monotone interpolation in |x| for fixed s
    double x2[2] = {rho * 1.2, 0.0};
    CHECK(g_eval(nl, tp, std::span<const double>(x2, 2), s) <= g * (1 + 1e-14) + 1e-300);
  }

  // eps scaling: g_eps(x, s) = g(eps x, s)
  double x[2] = {3.0, 4.0};
  double xe[2] = {0.3, 0.4};
  CHECK(g_eps_eval(nl, tp, 0.1, std::span<const double>(x, 2), 2.0) ==
        doctest::Approx(g_eval(nl, tp, std::span<const double>(xe, 2), 2.0)));
}

TEST_CASE("slope rule for the truncation") {
  TruncationParams tp;
  tp.alpha1 = 1.0;
  tp.a = 0.25;
  CHECK_NOTHROW(tp.validate(3.0));  // bound is 1/3
  tp.a = 0.4;
  CHECK_THROWS_WITH_AS(tp.validate(3.0),
                       doctest::Contains("slope bound 0 < a < (1 - 2/mu)*alpha1"),
                       ConfigError);
  tp.a = 0.0;  // default slope stays inside the bound
  CHECK(tp.slope(3.0) == doctest::Approx(0.9 / 3.0));
  CHECK_NOTHROW(tp.validate(3.0));
  tp.radii = {0.6, 0.45, 0.75, 0.9, 1.05};
  CHECK_THROWS_AS(tp.validate(3.0), ConfigError);
}

TEST_CASE("growth bound constants") {
  auto nl = cubic();
  SUBCASE("p equal to the exponent") {
    GrowthBound gb = growth_bound_check(nl, 0.1);
    CHECK(gb.c_delta <= 1.0);
    // C = 1 works outright: s^3 <= 0.1 s + s^3
    for (int i = 0; i < 100; ++i) {
      double s = std::exp(std::log(1e-6) + i * (std::log(1e3) - std::log(1e-6)) / 99);
      CHECK(nl.f(s) <= 0.1 * s + 1.0 * std::pow(s, 3.0));
    }
  }
  SUBCASE("p above the exponent needs the maximized constant") {
    auto nl4 = NonlinearitySpec::pure_power(3.0, 1.0, 3.0, 4.0);
    double c_oracle = oracle::golden_max(
        [](double s) { return (s * s * s - 0.1 * s) / std::pow(s, 4.0); }, 0.2, 5.0);
    CHECK(c_oracle == doctest::Approx(1.2171612389003690).epsilon(1e-10));
    GrowthBound gb = growth_bound_check(nl4, 0.1);
    CHECK(gb.c_delta == doctest::Approx(c_oracle).epsilon(1e-5));
  }
  SUBCASE("larger delta never needs a larger constant") {
    auto nl4 = NonlinearitySpec::pure_power(3.0, 1.0, 3.0, 4.0);
    double prev = growth_bound_check(nl4, 0.05).c_delta;
    for (double d : {0.1, 0.2, 0.5, 1.0}) {
      double c = growth_bound_check(nl4, d).c_delta;
      CHECK(c <= prev * (1 + 1e-12));
      prev = c;
    }
  }
}

TEST_CASE("hypothesis checker") {
  CHECK(check_hypotheses(cubic(), 2).empty());
  CHECK(check_hypotheses(mixed(), 2).empty());
  auto bad = cubic();
  bad.mu = 5.0;
  CHECK(!check_hypotheses(bad, 2).empty());
}

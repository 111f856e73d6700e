#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "spikelab/errors.hpp"
#include "spikelab/potential.hpp"

using namespace spikelab;

namespace {

PotentialSpec saddle(double beta = 0.3) {
  PotentialSpec p;
  p.kind = PotentialSpec::Kind::gaussian_saddle;
  p.dim = 2;
  p.beta = beta;
  return p;
}

PotentialSpec gauss_max(double beta = 0.3) {
  PotentialSpec p;
  p.kind = PotentialSpec::Kind::gaussian_max;
  p.dim = 2;
  p.beta = beta;
  return p;
}

PotentialSpec quartic_saddle(double beta = 0.5) {
  PotentialSpec p;
  p.kind = PotentialSpec::Kind::custom_polynomial_bump;
  p.dim = 2;
  p.beta = beta;
  p.monomials = {{-1.0, {4, 0}}, {1.0, {0, 4}}};
  return p;
}

PotentialSpec constant_one() {
  PotentialSpec p;
  p.kind = PotentialSpec::Kind::custom_polynomial_bump;
  p.dim = 2;
  p.beta = 1.0;
  p.monomials = {{0.0, {2, 0}}};
  return p;
}

}  // namespace

TEST_CASE("saddle potential values and derivatives") {
  auto p = saddle();
  std::vector<double> zero{0.0, 0.0};
  CHECK(p.value(zero) == 1.0);
  auto g = p.gradient(zero);
  CHECK(g[0] == 0.0);
  CHECK(g[1] == 0.0);
  auto H = p.hessian(zero);
  CHECK(H[0] == doctest::Approx(-0.6));
  CHECK(H[3] == doctest::Approx(0.6));
  CHECK(H[1] == doctest::Approx(0.0));

  std::vector<double> x{0.7, -0.4};
  CHECK(p.value(x) ==
        doctest::Approx(1.0 + 0.3 * (0.16 - 0.49) * std::exp(-(0.49 + 0.16))));

  // derivative consistency against central differences
  auto gx = p.gradient(x);
  auto Hx = p.hessian(x);
  double h = 1e-6;
  for (int i = 0; i < 2; ++i) {
    auto xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    CHECK(gx[i] == doctest::Approx((p.value(xp) - p.value(xm)) / (2 * h)).epsilon(1e-7));
    auto gp = p.gradient(xp);
    auto gm = p.gradient(xm);
    for (int j = 0; j < 2; ++j)
      CHECK(Hx[i * 2 + j] ==
            doctest::Approx((gp[j] - gm[j]) / (2 * h)).epsilon(1e-6));
  }
}

TEST_CASE("certified bounds match the 1D extremization oracle") {
  auto p = saddle(0.3);
  // |V - 1| <= beta * max_t t e^{-t} with t = |x|^2
  double env = oracle::golden_max([](double t) { return t * std::exp(-t); }, 0.0, 8.0);
  CHECK(env == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));
  CHECK(p.alpha1() == doctest::Approx(1.0 - 0.3 * env).epsilon(1e-12));
  CHECK(p.alpha2() == doctest::Approx(1.0 + 0.3 * env).epsilon(1e-12));
  CHECK(gauss_max(0.3).alpha2() == 1.0);

  auto q = quartic_saddle(0.5);
  // envelope 2 r^4 e^{-r^2}: max at r^2 = 2 is 8 e^{-2}
  CHECK(q.alpha1() == doctest::Approx(1.0 - 0.5 * 8.0 * std::exp(-2.0)).epsilon(1e-9));
}

TEST_CASE("classification of the critical point") {
  SUBCASE("nondegenerate saddle") {
    auto cpc = classify_critical_point(saddle());
    CHECK(cpc.tag == CriticalPointClass::Case::V2);
    CHECK(cpc.dim_E() == 1);
    CHECK(std::abs(cpc.E_basis[0][0]) == doctest::Approx(1.0));
    CHECK(cpc.E_basis[0][1] == doctest::Approx(0.0));
  }
  SUBCASE("nondegenerate maximum") {
    auto cpc = classify_critical_point(gauss_max());
    CHECK(cpc.tag == CriticalPointClass::Case::V1);
    CHECK(cpc.dim_E() == 2);
    CHECK(cpc.hessian_eigenvalues[0] == doctest::Approx(-0.6));
    CHECK(cpc.hessian_eigenvalues[1] == doctest::Approx(-0.6));
  }
  SUBCASE("degenerate quartic saddle requires a user basis") {
    CHECK_THROWS_AS(classify_critical_point(quartic_saddle()), SolverError);
    ClassifyOptions opts;
    opts.user_E = {{1.0, 0.0}};
    auto cpc = classify_critical_point(quartic_saddle(), opts);
    CHECK(cpc.tag == CriticalPointClass::Case::V3);
    CHECK(cpc.dim_E() == 1);
  }
  SUBCASE("wrong user basis fails the sphere split") {
    ClassifyOptions opts;
    opts.user_E = {{0.0, 1.0}};  // max and min swapped
    CHECK_THROWS_AS(classify_critical_point(quartic_saddle(), opts), SolverError);
  }
  SUBCASE("a local minimum is rejected") {
    auto p = quartic_saddle();
    p.monomials = {{1.0, {2, 0}}, {1.0, {0, 2}}};
    CHECK_THROWS_AS(classify_critical_point(p), SolverError);
  }
}

TEST_CASE("radius selection by level-set transversality") {
  std::vector<double> candidates{0.3, 0.45, 0.6};
  SUBCASE("saddle: level set hits the diagonals transversally") {
    auto sel = select_radius_R1(saddle(), candidates);
    CHECK(sel.found);
    CHECK(sel.radius == 0.3);
  }
  SUBCASE("maximum: the level set is empty off the origin") {
    auto sel = select_radius_R1(gauss_max(), candidates);
    CHECK(sel.found);
  }
  SUBCASE("constant potential: every radius is rejected") {
    auto sel = select_radius_R1(constant_one(), candidates);
    CHECK(!sel.found);
    CHECK(sel.rejected.size() == candidates.size());
  }
  SUBCASE("loosening the tangential tolerance never rejects an accepted radius") {
    RadiusOptions tight;
    tight.tol_tang = 1e-4;
    RadiusOptions loose;
    loose.tol_tang = 1e-6;
    auto p = saddle();
    for (double R : candidates) {
      double one[1] = {R};
      bool tight_ok = select_radius_R1(p, std::span<const double>(one, 1), tight).found;
      bool loose_ok = select_radius_R1(p, std::span<const double>(one, 1), loose).found;
      if (tight_ok) CHECK(loose_ok);
    }
  }
}

TEST_CASE("box bound check") {
  SUBCASE("saddle within certified range") {
    auto rep = check_V0(saddle(0.3), 4.0, 241);
    CHECK(rep.ok);
    CHECK(rep.observed_min >= 0.889);
    CHECK(rep.observed_max <= 1.112);
    CHECK(rep.observed_min == doctest::Approx(1.0 - 0.3 * std::exp(-1.0)).epsilon(1e-4));
  }
  SUBCASE("constant potential") {
    auto rep = check_V0(constant_one(), 2.0, 41);
    CHECK(rep.ok);
    CHECK(rep.observed_min == 1.0);
    CHECK(rep.observed_max == 1.0);
  }
  SUBCASE("oversized amplitude goes negative near |x| = 1") {
    auto rep = check_V0(saddle(5.0), 4.0, 241);
    CHECK(!rep.ok);
    CHECK(rep.observed_min < 0.0);
    CHECK(rep.observed_min == doctest::Approx(1.0 - 5.0 * std::exp(-1.0)).epsilon(1e-4));
    REQUIRE(rep.violating_point.size() == 2);
  }
}

TEST_CASE("spec validation") {
  auto p = saddle();
  p.dim = 1;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = saddle();
  p.beta = -0.1;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  auto q = quartic_saddle();
  q.monomials[0].powers = {1, 0};  // degree 1 moves the critical point
  CHECK_THROWS_AS(q.validate(), ConfigError);
  q = quartic_saddle();
  q.monomials[0].powers = {4};
  CHECK_THROWS_AS(q.validate(), ConfigError);
}

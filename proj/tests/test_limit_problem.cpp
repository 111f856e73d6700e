#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "spikelab/errors.hpp"
#include "spikelab/limit_problem.hpp"

using namespace spikelab;

namespace {

NonlinearitySpec cubic() { return NonlinearitySpec::pure_power(3.0, 1.0, 3.0, 3.0); }

const GroundState& townes() {
  static GroundState gs = solve_ground_state(1.0, cubic(), 2, 1e-6);
  return gs;
}

}  // namespace

TEST_CASE("planar cubic ground state reproduces the Townes profile") {
  const GroundState& gs = townes();
  // frozen from a high-resolution run, cross-checked against the fixed-step
  // RK4 oracle below
  CHECK(gs.u0 == doctest::Approx(2.2062008647).epsilon(1e-8));
  CHECK(gs.l2_norm_sq == doctest::Approx(11.7008965257).epsilon(1e-8));
  CHECK(gs.energy == doctest::Approx(5.850448259).epsilon(1e-8));

  oracle::Rk4Shot shot;
  shot.k = 1.0;
  shot.dim = 2;
  shot.f = [](double s) { return s > 0 ? s * s * s : 0.0; };
  shot.fp = [](double s) { return s > 0 ? 3 * s * s : 0.0; };
  CHECK(shot.shoot() == doctest::Approx(gs.u0).epsilon(1e-6));
}

TEST_CASE("planar identities forced by Pohozaev and Nehari") {
  const GroundState& gs = townes();
  CHECK(pohozaev_residual(gs) < 1e-8);
  CHECK(nehari_residual(gs) < 1e-8);
  CHECK(gs.grad_norm_sq == doctest::Approx(gs.l2_norm_sq).epsilon(1e-8));
  // |U|_{L4}^4 = 2 |U|_{L2}^2; for the cubic int f(U) U is the L4 moment
  CHECK(gs.fU_integral == doctest::Approx(2.0 * gs.l2_norm_sq).epsilon(1e-8));
  CHECK(gs.energy == doctest::Approx(0.5 * gs.grad_norm_sq).epsilon(1e-9));
  CHECK(gs.decay_rate == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("exact scaling of the cubic level in the plane") {
  const GroundState& g1 = townes();
  for (double k : {0.5, 2.0, 4.0}) {
    GroundState gk = solve_ground_state(k, cubic(), 2, 1e-6);
    CHECK(gk.energy == doctest::Approx(k * g1.energy).epsilon(1e-10));
    CHECK(gk.u0 == doctest::Approx(std::sqrt(k) * g1.u0).epsilon(1e-9));
    CHECK(gk.decay_rate == doctest::Approx(std::sqrt(k)).epsilon(0.02));
  }
}

TEST_CASE("pohozaev residual detects a perturbed profile") {
  GroundState gs = townes();
  // bump the profile and recompute the cached integrals through the same
  // quadrature
  const int n = gs.profile.n_points;
  double d = gs.profile.dr();
  for (int i = 0; i < n; ++i) {
    double r = d * i;
    gs.profile.values[i] += 0.1 * std::exp(-(r - 2.0) * (r - 2.0));
    gs.profile.derivs[i] += 0.1 * (-2.0 * (r - 2.0)) * std::exp(-(r - 2.0) * (r - 2.0));
  }
  std::vector<double> w(n);
  auto nl = cubic();
  for (int i = 0; i < n; ++i) w[i] = gs.profile.derivs[i] * gs.profile.derivs[i];
  gs.grad_norm_sq = radial_integral(w, d, 2);
  for (int i = 0; i < n; ++i) w[i] = gs.profile.values[i] * gs.profile.values[i];
  gs.l2_norm_sq = radial_integral(w, d, 2);
  for (int i = 0; i < n; ++i) w[i] = nl.F(gs.profile.values[i]);
  gs.F_integral = radial_integral(w, d, 2);
  CHECK(pohozaev_residual(gs) > 1e-5);
}

TEST_CASE("radial energy functional") {
  auto nl = cubic();
  const GroundState& gs = townes();

  RadialProfile zero = gs.profile;
  std::fill(zero.values.begin(), zero.values.end(), 0.0);
  std::fill(zero.derivs.begin(), zero.derivs.end(), 0.0);
  CHECK(energy_phi(1.0, nl, zero) == 0.0);

  CHECK(energy_phi(1.0, nl, gs) == doctest::Approx(0.5 * gs.grad_norm_sq).epsilon(1e-9));

  // doubling the amplitude crosses the pass: direct quadrature of the scaled
  // profile must land below the ground-state level
  RadialProfile twice = gs.profile;
  for (auto& v : twice.values) v *= 2.0;
  for (auto& v : twice.derivs) v *= 2.0;
  double e2 = energy_phi(1.0, nl, twice);
  CHECK(e2 < gs.energy);
  // second route: Simpson quadrature against the interpolant
  double e2_oracle =
      2.0 * M_PI *
      oracle::simpson(
          [&](double r) {
            double u = 2.0 * gs.profile.value_at(r);
            double h = 1e-5;
            double du = (2.0 * gs.profile.value_at(r + h) -
                         2.0 * gs.profile.value_at(r - h)) / (2.0 * h);
            return (0.5 * du * du + 0.5 * u * u - nl.F(u)) * r;
          },
          1e-6, gs.profile.r_max, 8192);
  CHECK(e2 == doctest::Approx(e2_oracle).epsilon(1e-4));
}

TEST_CASE("mountain pass curve, planar three-piece construction") {
  auto nl = cubic();
  const GroundState& gs = townes();
  MPCurve c = build_mp_curve(gs, nl);

  CHECK(c.energy_at(0.0) == 0.0);
  CHECK(c.energy_at(1.0) < -0.5 * gs.energy);
  CHECK(c.max_energy() == doctest::Approx(gs.energy).epsilon(1e-6));
  CHECK(c.at(c.t_peak).amplitude == doctest::Approx(1.0));
  CHECK(c.at(c.t_peak).dilation == doctest::Approx(1.0));

  // middle piece: dilation leaves the planar gradient term alone and the
  // Pohozaev identity kills the rest, so the energy is flat at m
  for (double t : {0.35, 0.45, 0.55, 0.65}) {
    CHECK(c.energy_at(t) == doctest::Approx(gs.energy).epsilon(1e-8));
  }

  // quadrature oracle along the path
  for (double t : {0.2, 0.5, 0.9}) {
    CurvePoint cp = c.at(t);
    RadialProfile dil = gs.profile;
    for (int i = 0; i < dil.n_points; ++i) {
      double r = gs.profile.dr() * i;
      dil.values[i] = cp.amplitude * gs.profile.value_at(r / cp.dilation);
      dil.derivs[i] = cp.amplitude / cp.dilation *
                      (gs.profile.value_at(r / cp.dilation + 1e-6) -
                       gs.profile.value_at(r / cp.dilation - 1e-6)) / 2e-6;
    }
    CHECK(energy_phi(1.0, nl, dil) == doctest::Approx(c.energy_at(t)).epsilon(1e-4));
  }
}

TEST_CASE("mountain pass curve, dilation construction in dimension 3") {
  auto nl = cubic();
  GroundState gs = solve_ground_state(1.0, nl, 3, 1e-6);
  CHECK(gs.u0 == doctest::Approx(4.3373876).epsilon(1e-6));
  MPCurve c = build_mp_curve(gs, nl);
  CHECK(c.energy_at(0.0) == 0.0);
  CHECK(c.energy_at(1.0) < -0.5 * gs.energy);
  CHECK(c.max_energy() == doctest::Approx(gs.energy).epsilon(1e-6));
  CHECK(c.theta > 1.0);
  // the max sits at the ground state parameter 1/theta
  CHECK(c.energy_at(c.t_peak) == doctest::Approx(gs.energy).epsilon(1e-9));
}

TEST_CASE("level curve k -> m_k") {
  auto nl = cubic();
  SUBCASE("cubic: m_k / k is constant") {
    std::vector<double> ks{0.5, 1.0, 2.0};
    auto tab = m_curve(ks, nl, 2, 1e-6);
    double ratio = tab[0].second / tab[0].first;
    for (auto [k, m] : tab) CHECK(m / k == doctest::Approx(ratio).epsilon(1e-10));
  }
  SUBCASE("mixed powers: strictly increasing") {
    auto nlm = NonlinearitySpec::sum_of_powers({3.0, 5.0}, {0.5, 0.5}, 3.0, 5.0);
    std::vector<double> ks;
    for (int i = 0; i < 8; ++i) ks.push_back(0.5 + 1.5 * i / 7.0);
    auto tab = m_curve(ks, nlm, 2, 1e-6);
    for (std::size_t i = 0; i + 1 < tab.size(); ++i)
      CHECK(tab[i].second < tab[i + 1].second);
  }
}

TEST_CASE("solver error paths") {
  auto nl = cubic();
  CHECK_THROWS_AS(solve_ground_state(-1.0, nl, 2, 1e-6), ConfigError);
  CHECK_THROWS_AS(solve_ground_state(1.0, NonlinearitySpec::pure_power(5.0), 3, 1e-6),
                  ConfigError);  // critical exponent in dimension 3
  ShootingOptions opts;
  opts.r_max = 5.0;  // far too small for 1e-8 decay
  CHECK_THROWS_AS(solve_ground_state(1.0, nl, 2, 1e-6, opts), SolverError);
}

TEST_CASE("profile interpolation") {
  const GroundState& gs = townes();
  const RadialProfile& p = gs.profile;
  double d = p.dr();
  for (int i : {0, 1, 7, 100, 2000})
    CHECK(p.value_at(d * i) == doctest::Approx(p.values[i]).epsilon(1e-12));
  CHECK(p.value_at(p.r_max + 1.0) == 0.0);
  // midpoint values stay between neighbors on the monotone profile
  for (int i : {3, 50, 500}) {
    double v = p.value_at(d * (i + 0.5));
    CHECK(v <= p.values[i]);
    CHECK(v >= p.values[i + 1]);
  }
}

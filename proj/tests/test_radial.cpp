#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "cap/quadrature.hpp"
#include "cap/radial_capacity.hpp"
#include "cap/warped_model.hpp"

using cap::WarpedModel;

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("unit ball capacity in R^3 is 4 pi") {
  CHECK(cap::ball_capacity_euclidean(2, 1.0) == doctest::Approx(4.0 * kPi).epsilon(1e-14));
}

TEST_CASE("ball capacity matches the tail integral for general n and radius") {
  for (int n : {2, 3, 4}) {
    for (double H0 : {0.5, 1.0, 2.0}) {
      double R = 1.0 / H0;
      // cap = omega_n / int_R^inf t^-n dt, the energy of the exact potential.
      double oracle = cap::unit_sphere_area(n) * (n - 1) * std::pow(R, n - 1);
      CHECK(cap::ball_capacity_euclidean(n, H0) == doctest::Approx(oracle).epsilon(1e-13));
    }
  }
}

TEST_CASE("annulus potential between radii 1 and 2 is 2/(1+r) - 1") {
  auto pot = cap::annulus_potential_euclidean(2, 1.0, 1.0);
  CHECK(pot.value(0.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::fabs(pot.value(1.0)) < 1e-14);
  for (double r : {0.1, 0.35, 0.5, 0.9})
    CHECK(pot.value(r) == doctest::Approx(2.0 / (1.0 + r) - 1.0).epsilon(1e-13));
  // The starting flux density reproduces the condenser capacity 8 pi.
  CHECK(-pot.slope(0.0) * 4.0 * kPi == doctest::Approx(8.0 * kPi).epsilon(1e-12));
}

TEST_CASE("exterior potential decays like the equilibrium profile") {
  for (int n : {2, 3}) {
    auto pot = cap::exterior_potential_euclidean(n, 2.0);
    CHECK(pot.value(0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(pot.value(3.0) == doctest::Approx(std::pow(7.0, 1 - n)).epsilon(1e-13));
    CHECK(-pot.slope(0.0) == doctest::Approx((n - 1) * 2.0).epsilon(1e-13));
  }
}

TEST_CASE("warped capacity in the euclidean model matches closed forms") {
  WarpedModel m = WarpedModel::euclidean(2);
  CHECK(cap::warped_ball_capacity(m, 1.0, kInf) == doctest::Approx(4.0 * kPi).epsilon(1e-10));
  // Condenser between spheres 1 and 2: 4 pi / (1 - 1/2).
  CHECK(cap::warped_ball_capacity(m, 1.0, 2.0) == doctest::Approx(8.0 * kPi).epsilon(1e-10));
}

TEST_CASE("hyperbolic geodesic ball capacity agrees with the antiderivative oracle") {
  WarpedModel m = WarpedModel::hyperbolic(2);
  // int_1^inf sinh^-2 = coth(1) - 1, so cap = 4 pi sinh(1) e.
  double oracle = 4.0 * kPi / (1.0 / std::tanh(1.0) - 1.0);
  CHECK(oracle == doctest::Approx(4.0 * kPi * std::sinh(1.0) * std::exp(1.0)).epsilon(1e-14));
  CHECK(cap::warped_ball_capacity(m, 1.0, kInf) == doctest::Approx(oracle).epsilon(1e-10));
}

TEST_CASE("profile with a flat tail is parabolic") {
  // g == 1 past t = 1 makes the g^-n integral diverge.
  WarpedModel m = WarpedModel::from_functions(
      2, [](double t) { return t < 1.0 ? t : 1.0; },
      [](double t) { return t < 1.0 ? 1.0 : 0.0; }, [](double) { return 0.0; }, "capped");
  CHECK(cap::warped_ball_capacity(m, 0.5, kInf) == doctest::Approx(0.0));
  CHECK_FALSE(cap::hyperbolicity_indicator(m));
  WarpedModel h = WarpedModel::hyperbolic(2);
  CHECK(cap::hyperbolicity_indicator(h));
}

TEST_CASE("warped potential is the normalized tail integral") {
  WarpedModel m = WarpedModel::hyperbolic(2);
  auto pot = cap::warped_potential(m, 1.0, kInf);
  auto coth = [](double t) { return 1.0 / std::tanh(t); };
  double denom = coth(1.0) - 1.0;
  CHECK(pot.value(0.0) == doctest::Approx(1.0).epsilon(1e-12));
  for (double r : {0.5, 1.0, 3.0})
    CHECK(pot.value(r) == doctest::Approx((coth(1.0 + r) - 1.0) / denom).epsilon(1e-9));
  CHECK(pot.value(30.0) < 1e-10);
}

TEST_CASE("truncated warped potential vanishes at the outer sphere") {
  WarpedModel m = WarpedModel::euclidean(2);
  auto pot = cap::warped_potential(m, 1.0, 2.0);
  CHECK(pot.value(0.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::fabs(pot.value(1.0)) < 1e-10);
  CHECK(pot.value(0.5) == doctest::Approx(2.0 / 1.5 - 1.0).epsilon(1e-10));
}

TEST_CASE("splice model passes the equality check") {
  WarpedModel m = WarpedModel::remark_splice(1.0, 2.0, 2);
  auto rep = cap::equality_check_remark(m, 1.0, 2.0);
  CHECK(rep.verdict == cap::Verdict::Equality);
  // cap = bound = (n-1) H0 omega_n g(t0)^n exactly.
  double bound = 2.0 * cap::unit_sphere_area(2) * m.g(1.0) * m.g(1.0);
  CHECK(rep.computed_curve.v[0] == doctest::Approx(bound).epsilon(1e-9));
}

TEST_CASE("hyperbolic model is strictly above its curvature bound") {
  WarpedModel m = WarpedModel::hyperbolic(2);
  double H0 = 1.0 / std::tanh(1.0);
  auto rep = cap::equality_check_remark(m, 1.0, H0);
  CHECK(rep.verdict == cap::Verdict::Holds);
  // Slack ratio over the bound is exactly tanh(1).
  double ratio = rep.worst_slack / rep.bound_curve.v[0];
  CHECK(ratio == doctest::Approx(std::tanh(1.0)).epsilon(1e-8));
}

TEST_CASE("invalid arguments are rejected") {
  WarpedModel m = WarpedModel::euclidean(2);
  CHECK_THROWS_AS(cap::warped_ball_capacity(m, 2.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(cap::ball_capacity_euclidean(1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(cap::ball_capacity_euclidean(2, -1.0), std::invalid_argument);
}

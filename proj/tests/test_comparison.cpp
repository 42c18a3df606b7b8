#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "cap/comparison.hpp"
#include "cap/radial_capacity.hpp"

using cap::CurvatureProfile;

TEST_CASE("sign certificates from sampling") {
  auto neg = CurvatureProfile::constant(CurvatureProfile::Quantity::Sectional, -1.0, 4.0);
  CHECK(neg.certify() == CurvatureProfile::Sign::Nonpositive);
  auto zero = CurvatureProfile::constant(CurvatureProfile::Quantity::Sectional, 0.0, 4.0);
  CHECK(zero.certify() == CurvatureProfile::Sign::Nonpositive);
  auto pos = CurvatureProfile::constant(CurvatureProfile::Quantity::Ricci, 2.0, 4.0);
  CHECK(pos.certify() == CurvatureProfile::Sign::Nonnegative);
  auto mixed = CurvatureProfile::table(CurvatureProfile::Quantity::Sectional,
                                       {{0.0, -1.0}, {2.0, 1.0}, {4.0, -1.0}}, 4.0);
  CHECK(mixed.certify() == CurvatureProfile::Sign::Mixed);
}

TEST_CASE("flat sectional profile reproduces the comparison curve") {
  auto flat = CurvatureProfile::constant(CurvatureProfile::Quantity::Sectional, 0.0, 4.0);
  auto flow = cap::riccati_flow(flat, 1.0, 4.0);
  CHECK(flow.completed);
  for (std::size_t i = 0; i < flow.curve.r.size(); ++i) {
    double r = flow.curve.r[i];
    CHECK(flow.curve.v[i] == doctest::Approx(cap::riccati_lower_bound(1.0, r)).epsilon(1e-8));
  }
}

TEST_CASE("constant negative curvature flow matches coth") {
  // f' = 1 - f^2 with f(0) = 2 integrates to coth(r + atanh(1/2)).
  auto sec = CurvatureProfile::constant(CurvatureProfile::Quantity::Sectional, -1.0, 3.0);
  auto flow = cap::riccati_flow(sec, 2.0, 3.0);
  CHECK(flow.completed);
  double shift = std::atanh(0.5);
  for (double r : {0.5, 1.0, 2.0, 3.0})
    CHECK(flow.curve(r) == doctest::Approx(1.0 / std::tanh(r + shift)).epsilon(1e-7));
  // And stays above the flat comparison curve.
  for (std::size_t i = 0; i < flow.curve.r.size(); ++i)
    CHECK(flow.curve.v[i] >= cap::riccati_lower_bound(2.0, flow.curve.r[i]) - 1e-9);
}

TEST_CASE("positive curvature drives the riccati flow to blow-down") {
  // f' = -1 - f^2 from f(0) = 2 hits zero at atan(2).
  auto sec = CurvatureProfile::constant(CurvatureProfile::Quantity::Sectional, 1.0, 4.0);
  auto flow = cap::riccati_flow(sec, 2.0, 4.0);
  CHECK_FALSE(flow.completed);
  CHECK(flow.stop_reason == "blow-down");
  CHECK(flow.stop_r == doctest::Approx(std::atan(2.0)).epsilon(1e-2));
}

TEST_CASE("flat umbilic mean curvature flow reproduces the upper bound curve") {
  auto ric = CurvatureProfile::constant(CurvatureProfile::Quantity::Ricci, 0.0, 4.0);
  auto flow = cap::mean_curvature_flow(ric, 1.5, 2, 4.0);
  CHECK(flow.completed);
  for (std::size_t i = 0; i < flow.curve.r.size(); ++i) {
    double r = flow.curve.r[i];
    CHECK(flow.curve.v[i] ==
          doctest::Approx(cap::mean_curvature_upper_bound(1.5, r)).epsilon(1e-8));
  }
}

TEST_CASE("nonnegative ricci keeps mean curvature below the comparison curve") {
  // Ric = n on the unit sphere scale; H' = -1 - H^2 decays through zero and
  // reaches the focal blow-up at atan(1) + pi/2, so stop short of it.
  auto ric = CurvatureProfile::constant(CurvatureProfile::Quantity::Ricci, 2.0, 2.0);
  auto flow = cap::mean_curvature_flow(ric, 1.0, 2, 2.0);
  CHECK(flow.completed);
  CHECK(flow.crossed_zero);
  for (std::size_t i = 0; i < flow.curve.r.size(); ++i)
    CHECK(flow.curve.v[i] <=
          cap::mean_curvature_upper_bound(1.0, flow.curve.r[i]) + 1e-9);
}

TEST_CASE("umbilicity defect only strengthens the upper bound") {
  auto ric = CurvatureProfile::constant(CurvatureProfile::Quantity::Ricci, 0.0, 3.0);
  auto skew = cap::mean_curvature_flow(ric, 1.0, 2, 3.0, [](double) { return 2.0; });
  auto umb = cap::mean_curvature_flow(ric, 1.0, 2, 3.0);
  CHECK(skew.completed);
  for (double r : {0.5, 1.0, 2.0, 3.0})
    CHECK(skew.curve(r) <= umb.curve(r) + 1e-10);
}

TEST_CASE("compare_flow_to_bound verdicts") {
  auto flat = CurvatureProfile::constant(CurvatureProfile::Quantity::Sectional, 0.0, 4.0);
  auto flow = cap::riccati_flow(flat, 1.0, 4.0);
  auto eq = cap::compare_flow_to_bound(
      flow, [](double r) { return cap::riccati_lower_bound(1.0, r); }, true);
  CHECK(eq.verdict == cap::Verdict::Equality);

  auto neg = CurvatureProfile::constant(CurvatureProfile::Quantity::Sectional, -1.0, 4.0);
  auto above = cap::riccati_flow(neg, 1.0, 4.0);
  auto holds = cap::compare_flow_to_bound(
      above, [](double r) { return cap::riccati_lower_bound(1.0, r); }, true);
  CHECK(holds.verdict == cap::Verdict::Holds);
  // Flows start exactly on the bound, so the worst slack sits at r = 0.
  CHECK(holds.worst_slack >= 0.0);
  CHECK(above.curve(2.0) > cap::riccati_lower_bound(1.0, 2.0) + 0.1);

  // Same data against the wrong direction must fail.
  auto fails = cap::compare_flow_to_bound(
      above, [](double r) { return cap::riccati_lower_bound(1.0, r); }, false);
  CHECK(fails.verdict == cap::Verdict::Fails);
}

TEST_CASE("random nonpositive profiles stay above the lower bound") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> cdist(-5.0, 0.0);
  std::uniform_real_distribution<double> f0dist(0.1, 5.0);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<std::pair<double, double>> knots;
    for (int k = 0; k < 8; ++k) knots.push_back({4.0 * k / 7.0, cdist(rng)});
    auto sec = CurvatureProfile::table(CurvatureProfile::Quantity::Sectional, knots, 4.0);
    REQUIRE(sec.certify() == CurvatureProfile::Sign::Nonpositive);
    double f0 = f0dist(rng);
    auto flow = cap::riccati_flow(sec, f0, 4.0);
    for (std::size_t i = 0; i < flow.curve.r.size(); ++i)
      CHECK(flow.curve.v[i] >= cap::riccati_lower_bound(f0, flow.curve.r[i]) - 1e-6);
  }
}

TEST_CASE("transplanted euclidean potential is harmonic under the exact mean curvature") {
  int n = 2;
  double H0 = 1.0;
  auto pot = cap::exterior_potential_euclidean(n, H0);
  auto exact_H = [&](double r) { return H0 / (1.0 + H0 * r); };
  for (double r : {0.0, 0.5, 1.0, 2.5})
    CHECK(std::fabs(cap::transplant_laplacian(pot, exact_H, r)) < 2e-9);
  // Smaller mean curvature tilts the laplacian positive (the potential
  // becomes subharmonic), which is the comparison mechanism.
  auto small_H = [&](double r) { return 0.5 * exact_H(r); };
  for (double r : {0.0, 0.5, 1.0, 2.5})
    CHECK(cap::transplant_laplacian(pot, small_H, r) > 0.0);
}

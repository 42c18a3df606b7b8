#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <stdexcept>

#include "cap/geometry.hpp"
#include "cap/vec.hpp"

using cap::ConvexBody;
using cap::Vec3;

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec3 random_dir(std::mt19937& rng) {
  std::normal_distribution<double> g;
  Vec3 v{g(rng), g(rng), g(rng)};
  return v / v.norm();
}

ConvexBody make_lens() {
  return ConvexBody::intersection({ConvexBody::ball({-0.5, 0.0, 0.0}, 1.0),
                                   ConvexBody::ball({0.5, 0.0, 0.0}, 1.0)});
}

// Brute-force nearest point on an ellipsoid by dense parameter sampling
// plus local refinement.
Vec3 ellipsoid_nearest_brute(const Vec3& axes, const Vec3& p) {
  auto at = [&](double th, double ph) {
    return Vec3{axes.x * std::cos(th) * std::sin(ph), axes.y * std::sin(th) * std::sin(ph),
                axes.z * std::cos(ph)};
  };
  double best = 1e300, bth = 0, bph = 0;
  for (int i = 0; i < 720; ++i)
    for (int j = 1; j < 360; ++j) {
      double th = 2.0 * kPi * i / 720.0, ph = kPi * j / 360.0;
      double d = (at(th, ph) - p).norm();
      if (d < best) best = d, bth = th, bph = ph;
    }
  double step = 2.0 * kPi / 720.0;
  for (int it = 0; it < 60; ++it) {
    bool improved = false;
    for (int di = -1; di <= 1; ++di)
      for (int dj = -1; dj <= 1; ++dj) {
        double th = bth + step * di, ph = bph + step * dj;
        double d = (at(th, ph) - p).norm();
        if (d < best - 1e-15) best = d, bth = th, bph = ph, improved = true;
      }
    if (!improved) step *= 0.5;
  }
  return at(bth, bph);
}

}  // namespace

TEST_CASE("ball sdf, projection and normals are exact") {
  ConvexBody b = ConvexBody::ball({1.0, -2.0, 0.5}, 2.0);
  CHECK(b.sdf({1.0, -2.0, 0.5}) == doctest::Approx(-2.0));
  CHECK(b.sdf({4.0, -2.0, 0.5}) == doctest::Approx(1.0).epsilon(1e-14));
  std::mt19937 rng(3);
  for (int i = 0; i < 50; ++i) {
    Vec3 d = random_dir(rng);
    Vec3 p = Vec3{1.0, -2.0, 0.5} + d * 3.7;
    Vec3 xi = cap::metric_projection(b, p);
    Vec3 expect = Vec3{1.0, -2.0, 0.5} + d * 2.0;
    CHECK((xi - expect).norm() < 1e-10);
    Vec3 nrm = cap::outer_normal(b, xi);
    CHECK((nrm - d).norm() < 1e-7);
  }
  CHECK_THROWS_WITH_AS(cap::metric_projection(b, {1.0, -2.0, 0.5}), "point-inside-body",
                       std::runtime_error);
}

TEST_CASE("ellipsoid projection matches a brute-force search") {
  Vec3 axes{0.8, 1.1, 1.4};
  ConvexBody e = ConvexBody::ellipsoid({0, 0, 0}, axes);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> rad(0.2, 3.0);
  for (int i = 0; i < 12; ++i) {
    Vec3 p = random_dir(rng) * (1.45 + rad(rng));
    Vec3 xi = cap::metric_projection(e, p);
    // On the surface.
    double impl = xi.x * xi.x / (axes.x * axes.x) + xi.y * xi.y / (axes.y * axes.y) +
                  xi.z * xi.z / (axes.z * axes.z);
    CHECK(impl == doctest::Approx(1.0).epsilon(1e-9));
    Vec3 brute = ellipsoid_nearest_brute(axes, p);
    CHECK((p - xi).norm() <= (p - brute).norm() + 1e-9);
    CHECK((xi - brute).norm() < 2e-3);
  }
}

TEST_CASE("sdf of the ellipsoid is the true exterior distance") {
  Vec3 axes{1.0, 1.0, 1.5};
  ConvexBody e = ConvexBody::ellipsoid({0, 0, 0}, axes);
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> rad(0.1, 2.0);
  for (int i = 0; i < 12; ++i) {
    Vec3 p = random_dir(rng) * (1.55 + rad(rng));
    Vec3 brute = ellipsoid_nearest_brute(axes, p);
    CHECK(e.sdf(p) == doctest::Approx((p - brute).norm()).epsilon(1e-5));
  }
}

TEST_CASE("metric projection is a contraction") {
  for (const ConvexBody& body :
       {make_lens(), ConvexBody::ellipsoid({0, 0, 0}, {0.7, 1.2, 1.0}),
        ConvexBody::intersection(
            {ConvexBody::ball({0, 0, 0}, 1.2), ConvexBody::slab({0, 0, 1}, -0.4, 0.6)})}) {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> rad(0.05, 2.5);
    for (int i = 0; i < 40; ++i) {
      Vec3 p = random_dir(rng) * (body.bounding_radius() + rad(rng));
      Vec3 q = random_dir(rng) * (body.bounding_radius() + rad(rng));
      Vec3 xp = cap::metric_projection(body, p);
      Vec3 xq = cap::metric_projection(body, q);
      CHECK((xp - xq).norm() <= (p - q).norm() * (1.0 + 1e-9) + 1e-12);
    }
  }
}

TEST_CASE("builtin bodies pass the sampled invariants") {
  CHECK_NOTHROW(ConvexBody::ball({0, 0, 0}, 1.0).validate());
  CHECK_NOTHROW(ConvexBody::ellipsoid({0.2, 0, -0.1}, {1.0, 1.3, 0.6}).validate());
  CHECK_NOTHROW(make_lens().validate());
}

TEST_CASE("validate rejects a non-lipschitz sdf") {
  // Twice the distance to a unit ball is not 1-Lipschitz.
  ConvexBody bad = ConvexBody::from_sdf(
      [](const Vec3& p) { return 2.0 * (p.norm() - 1.0); }, 1.0, true);
  CHECK_THROWS_AS(bad.validate(), std::runtime_error);
}

TEST_CASE("lens projection lands on the rim") {
  ConvexBody lens = make_lens();
  // The highest point of the lens is the rim circle of radius sqrt(3)/2.
  Vec3 xi = cap::metric_projection(lens, {0.0, 3.0, 0.0});
  CHECK(xi.x == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(xi.y == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-9));
  CHECK(std::fabs(xi.z) < 1e-9);
  CHECK_FALSE(lens.smooth());
  CHECK(lens.sdf({0, 0, 0}) < 0.0);
}

TEST_CASE("spheroid principal curvatures match the closed forms") {
  ConvexBody e = ConvexBody::ellipsoid({0, 0, 0}, {1.0, 1.0, 1.5});
  // Pole: both curvatures c / a^2.
  auto pole = cap::principal_curvatures(e, {0.0, 0.0, 1.5});
  CHECK(pole[0] == doctest::Approx(1.5).epsilon(1e-4));
  CHECK(pole[1] == doctest::Approx(1.5).epsilon(1e-4));
  // Equator: meridian a / c^2, equatorial circle 1 / a.
  auto eq = cap::principal_curvatures(e, {1.0, 0.0, 0.0});
  CHECK(eq[0] == doctest::Approx(4.0 / 9.0).epsilon(1e-4));
  CHECK(eq[1] == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("ball curvature is 1/R everywhere") {
  ConvexBody b = ConvexBody::ball({0, 0, 0}, 2.0);
  std::mt19937 rng(23);
  for (int i = 0; i < 8; ++i) {
    Vec3 p = random_dir(rng) * 2.0;
    auto k = cap::principal_curvatures(b, p);
    CHECK(k[0] == doctest::Approx(0.5).epsilon(1e-5));
    CHECK(k[1] == doctest::Approx(0.5).epsilon(1e-5));
  }
}

TEST_CASE("lens edge reports the rim curvature and an infinite sentinel") {
  ConvexBody lens = make_lens();
  auto k = cap::principal_curvatures(lens, {0.0, std::sqrt(3.0) / 2.0, 0.0});
  // Along the rim the limit of offset curvatures is 2/sqrt(3); across it the
  // curvature is unbounded.
  CHECK(k[0] == doctest::Approx(2.0 / std::sqrt(3.0)).epsilon(1e-3));
  CHECK(std::isinf(k[1]));
}

TEST_CASE("face points of the lens carry the face curvature") {
  ConvexBody lens = make_lens();
  auto k = cap::principal_curvatures(lens, {0.5, 0.0, 0.0});
  CHECK(k[0] == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(k[1] == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("parallel bodies compose and stay convex") {
  ConvexBody e = ConvexBody::ellipsoid({0, 0, 0}, {0.9, 1.1, 1.3});
  ConvexBody once = cap::parallel_body(e, 0.5);
  ConvexBody twice = cap::parallel_body(cap::parallel_body(e, 0.3), 0.2);
  std::mt19937 rng(31);
  for (int i = 0; i < 40; ++i) {
    Vec3 p = random_dir(rng) * 3.0;
    CHECK(once.sdf(p) == doctest::Approx(twice.sdf(p)).epsilon(1e-10));
    CHECK(once.sdf(p) == doctest::Approx(e.sdf(p) - 0.5).epsilon(1e-10));
  }
  CHECK(once.bounding_radius() >= e.bounding_radius() + 0.5 - 1e-12);
  // Offsetting smooths the lens edge.
  ConvexBody fat_lens = cap::parallel_body(make_lens(), 0.25);
  CHECK(fat_lens.smooth());
  auto k = cap::principal_curvatures(fat_lens, cap::metric_projection(fat_lens, {0, 3, 0}));
  CHECK(k[1] == doctest::Approx(4.0).epsilon(1e-2));  // 1/0.25 across the rounded rim
}

TEST_CASE("lambda convexity thresholds") {
  ConvexBody b = ConvexBody::ball({0, 0, 0}, 1.0);
  CHECK(cap::lambda_convexity_check(b, 0.9).holds);
  CHECK(cap::lambda_convexity_check(b, 1.0).holds);
  CHECK_FALSE(cap::lambda_convexity_check(b, 1.2).holds);

  ConvexBody lens = make_lens();
  CHECK(cap::lambda_convexity_check(lens, 1.0).holds);
  CHECK_FALSE(cap::lambda_convexity_check(lens, 1.05).holds);
}

TEST_CASE("minkowski residual is small and shrinks with resolution") {
  // The ball cancels symmetrically, so its residual sits at rounding level.
  ConvexBody b = ConvexBody::ball({0, 0, 0}, 1.0);
  CHECK(cap::minkowski_residual(b, {0, 0, 0}, 128) < 1e-6);
  ConvexBody e = ConvexBody::ellipsoid({0, 0, 0}, {1.0, 1.0, 1.5});
  double e64 = cap::minkowski_residual(e, {0, 0, 0}, 64);
  double e128 = cap::minkowski_residual(e, {0, 0, 0}, 128);
  CHECK(e128 < 1e-3);
  CHECK(e128 < e64);
}

TEST_CASE("mesh area and volume match closed forms") {
  ConvexBody b = ConvexBody::ball({0, 0, 0}, 1.0);
  CHECK(cap::area(b) == doctest::Approx(4.0 * kPi).epsilon(5e-4));
  CHECK(cap::volume(b) == doctest::Approx(4.0 * kPi / 3.0).epsilon(5e-3));

  // Prolate spheroid, a = b = 1 < c = 1.5.
  double a = 1.0, c = 1.5;
  double ecc = std::sqrt(1.0 - a * a / (c * c));
  double area_exact = 2.0 * kPi * a * a * (1.0 + c / (a * ecc) * std::asin(ecc));
  ConvexBody e = ConvexBody::ellipsoid({0, 0, 0}, {a, a, c});
  CHECK(cap::area(e) == doctest::Approx(area_exact).epsilon(5e-4));
  CHECK(cap::volume(e) == doctest::Approx(4.0 * kPi / 3.0 * a * a * c).epsilon(5e-3));

  // Lens: two spherical caps of height 1/2 on unit spheres.
  ConvexBody lens = make_lens();
  CHECK(cap::area(lens) == doctest::Approx(2.0 * kPi).epsilon(2e-3));
  double cap_vol = kPi * 0.25 * (3.0 - 0.5) / 3.0;
  CHECK(cap::volume(lens) == doctest::Approx(2.0 * cap_vol).epsilon(5e-3));
}

TEST_CASE("boundary samples sit on the surface with outward unit normals") {
  for (const ConvexBody& body :
       {ConvexBody::ellipsoid({0.1, 0, 0}, {0.8, 1.2, 1.0}), make_lens()}) {
    auto samples = cap::boundary_samples(body, 48);
    REQUIRE(samples.size() > 100);
    double total = 0.0;
    for (const auto& s : samples) {
      CHECK(std::fabs(body.sdf(s.point)) < 1e-6 * body.scale());
      CHECK(s.normal.norm() == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(body.sdf(s.point + s.normal * 0.05) > 0.0);
      total += s.weight;
    }
    CHECK(total == doctest::Approx(cap::area(body, 96)).epsilon(0.02));
  }
}

TEST_CASE("slab intersections are bounded with the expected volume") {
  // Unit ball cut to z in [-0.25, 0.5].
  ConvexBody cut = ConvexBody::intersection(
      {ConvexBody::ball({0, 0, 0}, 1.0), ConvexBody::slab({0, 0, 1}, -0.25, 0.5)});
  CHECK(cut.bounded());
  CHECK_FALSE(ConvexBody::slab({0, 0, 1}, -1.0, 1.0).bounded());
  // Volume of the segment: int_{-1/4}^{1/2} pi (1 - z^2) dz.
  auto slice = [](double z) { return kPi * (z - z * z * z / 3.0); };
  double exact = slice(0.5) - slice(-0.25);
  CHECK(cap::volume(cut, 160) == doctest::Approx(exact).epsilon(1e-2));
}

TEST_CASE("constructor validation") {
  CHECK_THROWS_AS(ConvexBody::ball({0, 0, 0}, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(ConvexBody::ellipsoid({0, 0, 0}, {1.0, 0.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(ConvexBody::slab({0, 0, 0}, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ConvexBody::slab({0, 0, 1}, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ConvexBody::intersection({ConvexBody::ball({0, 0, 0}, 1.0)}),
                  std::invalid_argument);
  CHECK_THROWS_AS(ConvexBody::intersection({ConvexBody::slab({0, 0, 1}, 0.0, 1.0),
                                            ConvexBody::slab({0, 1, 0}, 0.0, 1.0)}),
                  std::invalid_argument);
  CHECK_THROWS_AS(cap::parallel_body(ConvexBody::ball({0, 0, 0}, 1.0), -0.1),
                  std::invalid_argument);
}

TEST_CASE("symmetry axis is reported for axisymmetric bodies") {
  ConvexBody e = ConvexBody::ellipsoid({0, 0, 0}, {1.0, 1.0, 1.5});
  auto axis = e.symmetry_axis();
  REQUIRE(axis.has_value());
  CHECK(std::fabs(std::fabs(axis->z) - 1.0) < 1e-12);
  ConvexBody lens = make_lens();
  auto laxis = lens.symmetry_axis();
  REQUIRE(laxis.has_value());
  CHECK(std::fabs(std::fabs(laxis->x) - 1.0) < 1e-12);
  // A generic triaxial ellipsoid has none.
  CHECK_FALSE(ConvexBody::ellipsoid({0, 0, 0}, {0.8, 1.1, 1.4}).symmetry_axis().has_value());
}

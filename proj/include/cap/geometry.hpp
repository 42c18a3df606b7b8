#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cap/vec.hpp"

namespace cap {

struct SurfaceSample {
  Vec3 point;
  Vec3 normal;     // outward unit normal (a subgradient direction at edges)
  double weight;   // facet area carried by the sample
};

struct LambdaReport {
  bool holds = false;
  double worst_margin = 0.0;  // min over samples of 1/lambda - max reach
  int samples_checked = 0;
};

/// Compact convex body described by a signed distance function. For the
/// built-in kinds the sdf is the exact Euclidean distance outside the body
/// (inside, intersections fall back to the max of member distances, which
/// keeps the zero set and the sign but may underestimate depth near edges).
class ConvexBody {
 public:
  enum class Kind { Ball, Ellipsoid, Intersection, Slab, GenericSdf };

  static ConvexBody ball(const Vec3& center, double radius, int dimension = 3);
  static ConvexBody ellipsoid(const Vec3& center, const Vec3& semi_axes);
  /// Intersection of convex members; at least one bounded member required.
  static ConvexBody intersection(std::vector<ConvexBody> members);
  /// Slab { lo <= <p, normal> <= hi }. Unbounded, only meaningful as an
  /// intersection member.
  static ConvexBody slab(const Vec3& normal, double lo, double hi);
  /// Caller-supplied sdf; must be 1-Lipschitz with convex sublevel set.
  /// distance_exact marks sdfs that are true Euclidean distances outside.
  static ConvexBody from_sdf(std::function<double(const Vec3&)> sdf, double bounding_radius,
                             bool smooth, bool distance_exact = false);

  Kind kind() const;
  int dimension() const;  // ambient dimension n+1
  bool smooth() const;
  bool bounded() const;
  bool distance_exact() const;
  double bounding_radius() const;
  double scale() const;  // max(1, bounding_radius)
  Vec3 center() const;
  std::optional<Vec3> symmetry_axis() const;
  const std::vector<ConvexBody>& members() const;
  double ball_radius() const;  // Ball kind only

  double sdf(const Vec3& p) const;
  /// Nearest point of the body (p itself when p is inside).
  Vec3 project(const Vec3& p) const;

  const std::string& descriptor_text() const;
  void set_descriptor_text(std::string text);

  /// Sampled invariant checks (Lipschitz bound, convex sublevel set,
  /// positivity outside the bounding sphere). Throws on violation.
  void validate(int samples = 2000, unsigned seed = 1) const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
  ConvexBody() = default;
  friend ConvexBody parallel_body(const ConvexBody&, double);
};

/// Nearest boundary point for an exterior query point. Throws
/// "point-inside-body" when sdf(p) <= 0 and "projection-no-convergence"
/// when the iteration budget is exhausted.
Vec3 metric_projection(const ConvexBody& body, const Vec3& p);

/// Outward supporting normal. At smooth points this is the sdf gradient; at
/// edges it is the subgradient selected by projecting a point offset along
/// the finite-difference gradient.
Vec3 outer_normal(const ConvexBody& body, const Vec3& p);

/// Outer parallel set at distance r >= 0. Smooth for r > 0.
ConvexBody parallel_body(const ConvexBody& body, double r);

/// Triangulated zero level at the given grid resolution. Sample points sit
/// on the boundary (polished along the gradient); weights are facet areas.
std::vector<SurfaceSample> boundary_samples(const ConvexBody& body, int resolution);

/// Principal curvatures (ascending) at boundary point p. Smooth bodies are
/// probed by differencing the normal field; non-smooth bodies are probed on
/// offset surfaces at distances {probe, probe/2, probe/4} and the
/// extrapolated limit reported, with +infinity at genuine edges. probe <= 0
/// selects the default schedule. Throws "ridge-point" when the
/// extrapolation disagrees without the edge signature.
std::array<double, 2> principal_curvatures(const ConvexBody& body, const Vec3& p,
                                           double probe = 0.0);

/// Checks that every sampled boundary point carries a supporting ball of
/// radius 1/lambda containing the whole sample set.
LambdaReport lambda_convexity_check(const ConvexBody& body, double lambda, int samples = 1500,
                                    double tol = 1e-5);

/// | integral over the boundary of (1 + H <X, N>) dA | / area, with X the
/// position field from `center` and N the inner normal. Zero for closed
/// convex surfaces; the discrete value measures mesh plus curvature error.
double minkowski_residual(const ConvexBody& body, const Vec3& center, int resolution);

double area(const ConvexBody& body, int resolution = 128);
double volume(const ConvexBody& body, int resolution = 128);

}  // namespace cap

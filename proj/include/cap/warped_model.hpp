#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "cap/interp.hpp"

namespace cap {

/// Rotationally symmetric model space with metric dt^2 + g(t)^2 h on
/// [t_min, inf) x S^n (closed kind, g(0) = 0, g'(0) = 1) or on
/// [0, inf) x (boundary fiber) for the exterior kind (g(0) = 1).
struct WarpedModel {
  enum class Kind { Closed, Exterior };

  int n = 2;  // fiber dimension; ambient dimension is n + 1
  Kind kind = Kind::Closed;
  std::function<double(double)> g, dg, d2g;
  double t_min = 0.0;
  /// Exterior kind only: fiber volume at g = 1 (the boundary area of K).
  double boundary_area = 0.0;
  /// Affine continuation g(t) = affine_value + affine_slope * (t - affine_from)
  /// for t >= affine_from, when the profile ends in a straight line. Lets the
  /// capacity quadrature finish the tail in closed form.
  bool has_affine_tail = false;
  double affine_from = 0.0, affine_value = 0.0, affine_slope = 0.0;
  std::string profile_name;

  static WarpedModel euclidean(int n);
  static WarpedModel hyperbolic(int n);
  /// Convex profile that is exactly t near zero and exactly affine with
  /// slope g(t0) * H0 past t0. Requires H0 * t0 >= 1 (throws
  /// "infeasible-splice" otherwise).
  static WarpedModel remark_splice(double t0, double H0, int n);
  static WarpedModel exterior_equality(int n, double H0, double boundary_area);
  static WarpedModel tabulated(int n, const std::vector<std::pair<double, double>>& pts);
  static WarpedModel from_functions(int n, std::function<double(double)> g,
                                    std::function<double(double)> dg,
                                    std::function<double(double)> d2g,
                                    std::string name = "custom");
};

struct RadialCurvatures {
  double sec_radial = 0.0;   // plane containing d/dt: -g''/g
  double sec_tangent = 0.0;  // plane tangent to the fiber: (1 - g'^2)/g^2
};

/// Sectional curvatures at distance t. At the pole of a closed model the
/// t -> 0 limit is substituted.
RadialCurvatures radial_curvatures(const WarpedModel& m, double t);

/// True when both curvature families stay <= tol on a log-spaced sample
/// of the domain. Closed kind only.
bool is_cartan_hadamard(const WarpedModel& m, int sample_count = 512, double tol = 1e-9);

/// Infimum over sampled directions/radii of the radial and tangential
/// Ricci eigenvalues, n*(-g''/g) and (-g''/g) + (n-1)(1 - g'^2)/g^2.
double ricci_radial_lower(const WarpedModel& m, int sample_count = 512);

/// Mean curvature g'(t)/g(t) of the distance sphere {t = const}.
double sphere_mean_curvature(const WarpedModel& m, double t);

}  // namespace cap

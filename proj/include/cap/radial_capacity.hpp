#pragma once

#include <functional>

#include "cap/report.hpp"
#include "cap/warped_model.hpp"

namespace cap {

/// Radial potential profile. The argument of value/slope is the distance r
/// from the inner boundary, so value(0) = 1 and value(outer - inner) = 0
/// (outer may be infinite).
struct RadialPotential {
  int n = 2;
  double inner_radius = 0.0;
  double outer_radius = 0.0;  // +inf for exterior problems
  std::function<double(double)> value, slope;
};

/// Potential of the condenser between concentric spheres of radius 1/H0 and
/// 1/H0 + t in R^{n+1}:
///   ((1 + r H0)^{1-n} - (1 + t H0)^{1-n}) / (1 - (1 + t H0)^{1-n}).
RadialPotential annulus_potential_euclidean(int n, double H0, double t);

/// Exterior equilibrium potential (1 + r H0)^{1-n} of the ball of radius
/// 1/H0; |slope(0)| = (n-1) H0.
RadialPotential exterior_potential_euclidean(int n, double H0);

/// Capacity of the closed ball of radius 1/H0 in R^{n+1}:
/// (n-1) H0 * area of its boundary sphere.
double ball_capacity_euclidean(int n, double H0);

/// Capacity of the distance ball {t <= t0} relative to {t <= t1} in a warped
/// model; t1 may be infinity. Equals F / int_{t0}^{t1} g^{-n}, with F the
/// fiber volume at g = 1. Returns 0 when the improper integral diverges
/// (parabolic model). Throws "quadrature-inconclusive" when the tail test
/// cannot decide within budget.
double warped_ball_capacity(const WarpedModel& m, double t0, double t1);

/// The corresponding radial potential: value(r) = tail(t0+r) / tail(t0).
RadialPotential warped_potential(const WarpedModel& m, double t0, double t1);

/// True when the model carries positive capacity (the g^{-n} tail integral
/// converges). Throws "quadrature-inconclusive" if undecided.
bool hyperbolicity_indicator(const WarpedModel& m);

/// Verifies cap({t <= t0}) == (n-1) H0 * vol boundary for an equality model
/// (affine profile past t0 with slope H0 g(t0)). Relative tolerance rel_tol.
ComparisonReport equality_check_remark(const WarpedModel& m, double t0, double H0,
                                       double rel_tol = 1e-8);

}  // namespace cap

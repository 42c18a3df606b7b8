#pragma once

#include <functional>
#include <string>

#include "cap/radial_capacity.hpp"
#include "cap/report.hpp"

namespace cap {

/// Curvature input along a geodesic ray, either a radial sectional curvature
/// or a radial Ricci curvature (already summed over an orthonormal fiber
/// frame, so Ric(gamma', gamma')).
struct CurvatureProfile {
  enum class Quantity { Sectional, Ricci };
  Quantity quantity = Quantity::Sectional;
  std::function<double(double)> value;
  double r_max = 0.0;

  static CurvatureProfile constant(Quantity q, double c, double r_max);
  static CurvatureProfile table(Quantity q, const std::vector<std::pair<double, double>>& pts,
                                double r_max);

  enum class Sign { Nonpositive, Nonnegative, Mixed };
  /// Sign certificate established by sampling.
  Sign certify(int samples = 1024, double tol = 0.0) const;
};

struct FlowResult {
  SampledCurve curve;
  bool completed = false;    // reached r_max
  double stop_r = 0.0;       // where integration ended
  std::string stop_reason;   // "r_max", "blow-down", "blow-up"
  bool crossed_zero = false; // mean curvature flows may continue through 0
};

/// Integrates f' = -sec(r) - f^2, f(0) = f0 > 0, with fixed-step RK4 refined
/// by step halving until successive grids agree pointwise below accept_tol.
/// Stops early when f < 1e-9 (blow-down) or |f| > 1e9.
FlowResult riccati_flow(const CurvatureProfile& sec, double f0, double r_max,
                        double step = 1e-2, double accept_tol = 1e-8);

/// Comparison solution f0 / (1 + f0 r) of f' = -f^2.
double riccati_lower_bound(double f0, double r);

/// Integrates n H' = -Ric(r) - |sigma|^2 with |sigma|^2 = umbilicity(r) * n * H^2
/// (umbilicity >= 1, equality for umbilic spheres). Continues through H = 0;
/// stops only at |H| > 1e9.
FlowResult mean_curvature_flow(const CurvatureProfile& ric, double H0, int n, double r_max,
                               std::function<double(double)> umbilicity = nullptr,
                               double step = 1e-2, double accept_tol = 1e-8);

/// Comparison solution H0 / (1 + H0 r) of H' = -H^2.
double mean_curvature_upper_bound(double H0, double r);

/// Laplacian of the transplanted radial potential at distance r from the
/// boundary: value''(r) + n * H(r) * value'(r).
double transplant_laplacian(const RadialPotential& potential,
                            const std::function<double(double)>& mean_curvature, double r);

/// Report for a flow against its comparison curve. `lower` selects the
/// direction: true checks flow >= bound, false checks flow <= bound.
ComparisonReport compare_flow_to_bound(const FlowResult& flow,
                                       const std::function<double(double)>& bound, bool lower,
                                       double equality_tol = 1e-8);

}  // namespace cap

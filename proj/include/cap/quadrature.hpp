#pragma once

#include <functional>

namespace cap {

struct QuadratureOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_depth = 60;
};

/// Adaptive Simpson integral of f over [a, b].
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& opts = {});

struct TailIntegral {
  double value = 0.0;
  bool converged = false;  // remainder certified below tolerance
  bool divergent = false;  // dyadic blocks refuse to decay
};

/// Integral of f over [a, inf). Sums dyadic blocks [a*2^k, a*2^(k+1)] and
/// certifies the remainder through the observed geometric decay ratio.
/// Blocks whose ratio stays above `divergence_ratio` for 20 consecutive
/// blocks mark the integral divergent. Neither outcome within the block
/// budget leaves converged == divergent == false (inconclusive).
TailIntegral integrate_to_infinity(const std::function<double(double)>& f, double a,
                                   const QuadratureOptions& opts = {},
                                   double divergence_ratio = 0.99, int max_blocks = 400);

/// Volume of the unit n-sphere (boundary of the unit ball in R^{n+1}),
/// 2 pi^((n+1)/2) / Gamma((n+1)/2).
double unit_sphere_area(int n);

}  // namespace cap

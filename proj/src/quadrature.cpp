#include "cap/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace cap {

namespace {

double simpson(double fa, double fm, double fb, double h) {
  return h / 6.0 * (fa + 4.0 * fm + fb);
}

double adapt(const std::function<double(double)>& f, double a, double b, double fa, double fm,
             double fb, double whole, double tol, int depth, const QuadratureOptions& opts) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = simpson(fa, flm, fm, m - a);
  double right = simpson(fm, frm, fb, b - m);
  double err = (left + right - whole) / 15.0;
  if (depth >= opts.max_depth || std::fabs(err) <= tol) return left + right + err;
  return adapt(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1, opts) +
         adapt(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1, opts);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& opts) {
  if (a == b) return 0.0;
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = simpson(fa, fm, fb, b - a);
  double tol = std::max(opts.abs_tol, opts.rel_tol * std::fabs(whole));
  return adapt(f, a, b, fa, fm, fb, whole, tol, 0, opts);
}

TailIntegral integrate_to_infinity(const std::function<double(double)>& f, double a,
                                   const QuadratureOptions& opts, double divergence_ratio,
                                   int max_blocks) {
  if (a <= 0.0) throw std::invalid_argument("integrate_to_infinity: a must be positive");
  TailIntegral out;
  double lo = a;
  double prev_block = 0.0;
  int slow_blocks = 0;
  for (int k = 0; k < max_blocks; ++k) {
    double hi = 2.0 * lo;
    double block = integrate(f, lo, hi, opts);
    out.value += block;
    double mag = std::fabs(block);
    if (k > 0 && prev_block > 0.0) {
      double ratio = mag / prev_block;
      if (ratio >= divergence_ratio) {
        if (++slow_blocks >= 20) {
          out.divergent = true;
          return out;
        }
      } else {
        slow_blocks = 0;
      }
      // Remainder <= block * r / (1 - r) once the decay ratio r < 1 holds.
      if (ratio < 0.9) {
        double remainder = mag * ratio / (1.0 - ratio);
        double tol = std::max(opts.abs_tol, opts.rel_tol * std::fabs(out.value));
        if (remainder <= tol && mag <= tol) {
          out.converged = true;
          return out;
        }
      }
    }
    prev_block = std::max(mag, 1e-300);
    lo = hi;
  }
  return out;
}

double unit_sphere_area(int n) {
  if (n < 1) throw std::invalid_argument("unit_sphere_area: n must be >= 1");
  // Gamma((n+1)/2) by the recursion Gamma(x+1) = x Gamma(x), starting from
  // Gamma(1) = 1 or Gamma(1/2) = sqrt(pi). Exact to rounding.
  double x = 0.5 * (n + 1);
  double gamma;
  double base;
  if (n % 2 == 1) {
    gamma = 1.0;  // Gamma(1)
    base = 1.0;
  } else {
    gamma = std::sqrt(M_PI);  // Gamma(1/2)
    base = 0.5;
  }
  for (double t = base; t + 0.5 < x + 0.25; t += 1.0) gamma *= t;
  return 2.0 * std::pow(M_PI, 0.5 * (n + 1)) / gamma;
}

}  // namespace cap

#pragma once

#include <utility>
#include <vector>

namespace cap {

/// Monotone cubic Hermite interpolant (Fritsch-Carlson slope limiting).
/// Extends linearly past the last knot; evaluation before the first knot
/// is an error.
class PchipCurve {
 public:
  PchipCurve() = default;
  explicit PchipCurve(std::vector<std::pair<double, double>> knots);

  double value(double t) const;
  double slope(double t) const;
  double curvature(double t) const;  // second derivative, piecewise linear

  double t_front() const { return t_.front(); }
  double t_back() const { return t_.back(); }
  double slope_back() const { return m_.back(); }

 private:
  int interval(double t) const;
  std::vector<double> t_, y_, m_;
};

/// Piecewise linear sample set, used for flow outputs.
struct SampledCurve {
  std::vector<double> r;
  std::vector<double> v;
  double operator()(double x) const;
  double front_r() const { return r.front(); }
  double back_r() const { return r.back(); }
};

}  // namespace cap

#include "cap/interp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cap {

PchipCurve::PchipCurve(std::vector<std::pair<double, double>> knots) {
  if (knots.size() < 2) throw std::invalid_argument("PchipCurve: need at least two knots");
  std::sort(knots.begin(), knots.end());
  size_t n = knots.size();
  t_.resize(n);
  y_.resize(n);
  for (size_t i = 0; i < n; ++i) {
    t_[i] = knots[i].first;
    y_[i] = knots[i].second;
    if (i > 0 && t_[i] <= t_[i - 1])
      throw std::invalid_argument("PchipCurve: knots must be strictly increasing");
  }
  std::vector<double> h(n - 1), d(n - 1);
  for (size_t i = 0; i + 1 < n; ++i) {
    h[i] = t_[i + 1] - t_[i];
    d[i] = (y_[i + 1] - y_[i]) / h[i];
  }
  m_.assign(n, 0.0);
  if (n == 2) {
    m_[0] = m_[1] = d[0];
  } else {
    for (size_t i = 1; i + 1 < n; ++i) {
      if (d[i - 1] * d[i] <= 0.0) {
        m_[i] = 0.0;
      } else {
        double w1 = 2.0 * h[i] + h[i - 1];
        double w2 = h[i] + 2.0 * h[i - 1];
        m_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
      }
    }
    // One-sided endpoint slopes, clipped so monotone data stays monotone.
    auto endpoint = [](double h0, double h1, double d0, double d1) {
      double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
      if (m * d0 <= 0.0) return 0.0;
      if (d0 * d1 <= 0.0 && std::fabs(m) > 3.0 * std::fabs(d0)) return 3.0 * d0;
      return m;
    };
    m_[0] = endpoint(h[0], h[1], d[0], d[1]);
    m_[n - 1] = endpoint(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
  }
}

int PchipCurve::interval(double t) const {
  if (t < t_.front() - 1e-12 * std::max(1.0, std::fabs(t_.front())))
    throw std::domain_error("PchipCurve: evaluation before first knot");
  auto it = std::upper_bound(t_.begin(), t_.end(), t);
  int i = int(it - t_.begin()) - 1;
  return std::clamp(i, 0, int(t_.size()) - 2);
}

double PchipCurve::value(double t) const {
  if (t >= t_.back()) return y_.back() + m_.back() * (t - t_.back());
  int i = interval(t);
  double h = t_[i + 1] - t_[i];
  double s = (t - t_[i]) / h;
  double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
  double h10 = s * (1 - s) * (1 - s);
  double h01 = s * s * (3 - 2 * s);
  double h11 = s * s * (s - 1);
  return h00 * y_[i] + h10 * h * m_[i] + h01 * y_[i + 1] + h11 * h * m_[i + 1];
}

double PchipCurve::slope(double t) const {
  if (t >= t_.back()) return m_.back();
  int i = interval(t);
  double h = t_[i + 1] - t_[i];
  double s = (t - t_[i]) / h;
  double g00 = 6 * s * s - 6 * s;
  double g10 = 3 * s * s - 4 * s + 1;
  double g01 = -6 * s * s + 6 * s;
  double g11 = 3 * s * s - 2 * s;
  return (g00 * y_[i] + g01 * y_[i + 1]) / h + g10 * m_[i] + g11 * m_[i + 1];
}

double PchipCurve::curvature(double t) const {
  if (t >= t_.back()) return 0.0;
  int i = interval(t);
  double h = t_[i + 1] - t_[i];
  double s = (t - t_[i]) / h;
  double q00 = 12 * s - 6;
  double q10 = 6 * s - 4;
  double q01 = -12 * s + 6;
  double q11 = 6 * s - 2;
  return (q00 * y_[i] + q01 * y_[i + 1]) / (h * h) + (q10 * m_[i] + q11 * m_[i + 1]) / h;
}

double SampledCurve::operator()(double x) const {
  if (r.empty()) throw std::logic_error("SampledCurve: empty");
  if (x <= r.front()) return v.front();
  if (x >= r.back()) return v.back();
  auto it = std::upper_bound(r.begin(), r.end(), x);
  size_t i = size_t(it - r.begin()) - 1;
  double w = (x - r[i]) / (r[i + 1] - r[i]);
  return (1.0 - w) * v[i] + w * v[i + 1];
}

}  // namespace cap

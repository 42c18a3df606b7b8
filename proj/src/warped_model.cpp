#include "cap/warped_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

namespace cap {

WarpedModel WarpedModel::euclidean(int n) {
  WarpedModel m;
  m.n = n;
  m.kind = Kind::Closed;
  m.g = [](double t) { return t; };
  m.dg = [](double) { return 1.0; };
  m.d2g = [](double) { return 0.0; };
  m.has_affine_tail = true;
  m.affine_from = 0.0;
  m.affine_value = 0.0;
  m.affine_slope = 1.0;
  m.profile_name = "euclidean";
  return m;
}

WarpedModel WarpedModel::hyperbolic(int n) {
  WarpedModel m;
  m.n = n;
  m.kind = Kind::Closed;
  m.g = [](double t) { return std::sinh(t); };
  m.dg = [](double t) { return std::cosh(t); };
  m.d2g = [](double t) { return std::sinh(t); };
  m.profile_name = "hyperbolic";
  return m;
}

WarpedModel WarpedModel::remark_splice(double t0, double H0, int n) {
  if (t0 <= 0.0 || H0 <= 0.0) throw std::invalid_argument("remark_splice: t0, H0 must be positive");
  if (H0 * t0 < 1.0 - 1e-12)
    throw std::domain_error("infeasible-splice: requires H0 * t0 >= 1");
  // g'' = c * (t - a)^2 * (t0 - t)^2 on [a, t0], zero elsewhere; g(t) = t on
  // [0, a] and affine past t0. The amplitude c is fixed by g'(t0) = H0 g(t0):
  //   W1 = int g''/c = L^5/30, W2 = int (t0 - s) g''(s)/c ds = L^6/60,
  //   c = (H0 t0 - 1) / (W1 - H0 W2), positive because L <= 1/H0.
  double L = std::min(0.9 * t0, 1.0 / H0);
  double a = t0 - L;
  double c = 60.0 * (H0 * t0 - 1.0) / (std::pow(L, 5) * (2.0 - H0 * L));
  double G = t0 + c * std::pow(L, 6) / 60.0;       // g(t0)
  double slope = 1.0 + c * std::pow(L, 5) / 30.0;  // g'(t0) = H0 * G

  WarpedModel m;
  m.n = n;
  m.kind = Kind::Closed;
  m.g = [a, t0, L, c, G, slope](double t) {
    if (t <= a) return t;
    if (t >= t0) return G + slope * (t - t0);
    double x = t - a;
    return t + c * (L * L * std::pow(x, 4) / 12.0 - L * std::pow(x, 5) / 10.0 + std::pow(x, 6) / 30.0);
  };
  m.dg = [a, t0, L, c, slope](double t) {
    if (t <= a) return 1.0;
    if (t >= t0) return slope;
    double x = t - a;
    return 1.0 + c * (L * L * std::pow(x, 3) / 3.0 - L * std::pow(x, 4) / 2.0 + std::pow(x, 5) / 5.0);
  };
  m.d2g = [a, t0, L, c](double t) {
    if (t <= a || t >= t0) return 0.0;
    double x = t - a;
    return c * x * x * (L - x) * (L - x);
  };
  m.has_affine_tail = true;
  m.affine_from = t0;
  m.affine_value = G;
  m.affine_slope = slope;
  m.profile_name = "remark-splice";
  return m;
}

WarpedModel WarpedModel::exterior_equality(int n, double H0, double boundary_area) {
  if (H0 <= 0.0 || boundary_area <= 0.0)
    throw std::invalid_argument("exterior_equality: H0 and boundary_area must be positive");
  WarpedModel m;
  m.n = n;
  m.kind = Kind::Exterior;
  m.g = [H0](double r) { return 1.0 + H0 * r; };
  m.dg = [H0](double) { return H0; };
  m.d2g = [](double) { return 0.0; };
  m.boundary_area = boundary_area;
  m.has_affine_tail = true;
  m.affine_from = 0.0;
  m.affine_value = 1.0;
  m.affine_slope = H0;
  m.profile_name = "exterior-equality";
  return m;
}

WarpedModel WarpedModel::tabulated(int n, const std::vector<std::pair<double, double>>& pts) {
  auto curve = std::make_shared<PchipCurve>(pts);
  WarpedModel m;
  m.n = n;
  m.kind = Kind::Closed;
  m.t_min = curve->t_front();
  m.g = [curve](double t) { return curve->value(t); };
  m.dg = [curve](double t) { return curve->slope(t); };
  m.d2g = [curve](double t) { return curve->curvature(t); };
  // Past the last knot the interpolant continues linearly.
  m.has_affine_tail = true;
  m.affine_from = curve->t_back();
  m.affine_value = curve->value(curve->t_back());
  m.affine_slope = curve->slope_back();
  m.profile_name = "tabulated";
  return m;
}

WarpedModel WarpedModel::from_functions(int n, std::function<double(double)> g,
                                        std::function<double(double)> dg,
                                        std::function<double(double)> d2g, std::string name) {
  WarpedModel m;
  m.n = n;
  m.kind = Kind::Closed;
  m.g = std::move(g);
  m.dg = std::move(dg);
  m.d2g = std::move(d2g);
  m.profile_name = std::move(name);
  return m;
}

namespace {

double pole_guard(const WarpedModel& m, double t) {
  // Evaluating curvature quotients at the pole of a closed model divides by
  // g(0) = 0; substitute a point close enough that the limit has settled.
  double eps = 1e-6 * std::max(1.0, m.has_affine_tail ? m.affine_from : 1.0);
  if (m.kind == WarpedModel::Kind::Closed && t < m.t_min + eps) return m.t_min + eps;
  return t;
}

}  // namespace

RadialCurvatures radial_curvatures(const WarpedModel& m, double t) {
  t = pole_guard(m, t);
  double g = m.g(t);
  if (g <= 0.0) throw std::domain_error("radial_curvatures: g(t) <= 0");
  double dg = m.dg(t);
  RadialCurvatures rc;
  rc.sec_radial = -m.d2g(t) / g;
  rc.sec_tangent = (1.0 - dg * dg) / (g * g);
  return rc;
}

namespace {

std::vector<double> log_samples(const WarpedModel& m, int count) {
  double scale = std::max(1.0, m.has_affine_tail ? m.affine_from : 1.0);
  double lo = std::max(m.t_min, 0.0) + 1e-3 * scale;
  double hi = 1e3 * scale;
  std::vector<double> ts(count);
  for (int i = 0; i < count; ++i)
    ts[i] = lo * std::pow(hi / lo, double(i) / double(count - 1));
  return ts;
}

}  // namespace

bool is_cartan_hadamard(const WarpedModel& m, int sample_count, double tol) {
  if (m.kind != WarpedModel::Kind::Closed)
    throw std::domain_error("is_cartan_hadamard: closed models only");
  for (double t : log_samples(m, std::max(2, sample_count))) {
    RadialCurvatures rc = radial_curvatures(m, t);
    if (rc.sec_radial > tol || rc.sec_tangent > tol) return false;
  }
  return true;
}

double ricci_radial_lower(const WarpedModel& m, int sample_count) {
  if (m.kind != WarpedModel::Kind::Closed)
    throw std::domain_error("ricci_radial_lower: closed models only");
  double lower = std::numeric_limits<double>::infinity();
  for (double t : log_samples(m, std::max(2, sample_count))) {
    RadialCurvatures rc = radial_curvatures(m, t);
    double radial = m.n * rc.sec_radial;
    double tangent = rc.sec_radial + (m.n - 1) * rc.sec_tangent;
    lower = std::min({lower, radial, tangent});
  }
  return lower;
}

double sphere_mean_curvature(const WarpedModel& m, double t) {
  t = pole_guard(m, t);
  double g = m.g(t);
  if (g <= 0.0) throw std::domain_error("sphere_mean_curvature: g(t) <= 0");
  return m.dg(t) / g;
}

}  // namespace cap

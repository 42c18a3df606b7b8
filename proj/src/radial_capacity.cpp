#include "cap/radial_capacity.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "cap/quadrature.hpp"

namespace cap {

RadialPotential annulus_potential_euclidean(int n, double H0, double t) {
  if (n < 2) throw std::invalid_argument("invalid-dimension: n must be >= 2");
  if (H0 <= 0.0 || t <= 0.0)
    throw std::invalid_argument("annulus_potential_euclidean: H0, t must be positive");
  double denom = 1.0 - std::pow(1.0 + t * H0, 1.0 - n);
  RadialPotential p;
  p.n = n;
  p.inner_radius = 1.0 / H0;
  p.outer_radius = 1.0 / H0 + t;
  p.value = [n, H0, t, denom](double r) {
    return (std::pow(1.0 + r * H0, 1.0 - n) - std::pow(1.0 + t * H0, 1.0 - n)) / denom;
  };
  p.slope = [n, H0, denom](double r) {
    return (1.0 - n) * H0 * std::pow(1.0 + r * H0, -double(n)) / denom;
  };
  return p;
}

RadialPotential exterior_potential_euclidean(int n, double H0) {
  if (n < 2) throw std::invalid_argument("invalid-dimension: n must be >= 2");
  if (H0 <= 0.0) throw std::invalid_argument("exterior_potential_euclidean: H0 must be positive");
  RadialPotential p;
  p.n = n;
  p.inner_radius = 1.0 / H0;
  p.outer_radius = std::numeric_limits<double>::infinity();
  p.value = [n, H0](double r) { return std::pow(1.0 + r * H0, 1.0 - n); };
  p.slope = [n, H0](double r) { return (1.0 - n) * H0 * std::pow(1.0 + r * H0, -double(n)); };
  return p;
}

double ball_capacity_euclidean(int n, double H0) {
  if (n < 2) throw std::invalid_argument("invalid-dimension: n must be >= 2");
  if (H0 <= 0.0) throw std::invalid_argument("ball_capacity_euclidean: H0 must be positive");
  // (n-1) H0 * omega_n * (1/H0)^n
  return (n - 1) * unit_sphere_area(n) * std::pow(H0, 1.0 - n);
}

namespace {

double fiber_volume_unit(const WarpedModel& m) {
  return m.kind == WarpedModel::Kind::Exterior ? m.boundary_area : unit_sphere_area(m.n);
}

// int_{t0}^{t1} g(s)^{-n} ds; infinite t1 handled by an exact affine tail
// when available, otherwise by certified dyadic blocks. Returns infinity
// for a divergent tail.
double profile_integral(const WarpedModel& m, double t0, double t1) {
  auto integrand = [&m](double s) { return std::pow(m.g(s), -double(m.n)); };
  QuadratureOptions opts;
  if (std::isfinite(t1)) return integrate(integrand, t0, t1, opts);

  if (m.has_affine_tail && m.affine_slope > 0.0 && m.n >= 2) {
    double ts = std::max(t0, m.affine_from);
    double head = ts > t0 ? integrate(integrand, t0, ts, opts) : 0.0;
    // int_ts^inf (v + s*(t - from))^{-n} dt = gs^{1-n} / ((n-1) s)
    double gs = m.affine_value + m.affine_slope * (ts - m.affine_from);
    double tail = std::pow(gs, 1.0 - m.n) / ((m.n - 1) * m.affine_slope);
    return head + tail;
  }

  TailIntegral ti = integrate_to_infinity(integrand, std::max(t0, 1e-12), opts);
  if (ti.divergent) return std::numeric_limits<double>::infinity();
  if (!ti.converged) throw std::runtime_error("quadrature-inconclusive: g^{-n} tail undecided");
  return ti.value;
}

}  // namespace

double warped_ball_capacity(const WarpedModel& m, double t0, double t1) {
  if (!(t1 > t0)) throw std::invalid_argument("warped_ball_capacity: need t1 > t0");
  if (m.kind == WarpedModel::Kind::Closed && t0 <= m.t_min)
    throw std::invalid_argument("warped_ball_capacity: t0 must exceed the pole");
  double I = profile_integral(m, t0, t1);
  if (std::isinf(I)) return 0.0;
  return fiber_volume_unit(m) / I;
}

RadialPotential warped_potential(const WarpedModel& m, double t0, double t1) {
  double D = profile_integral(m, t0, t1);
  if (!std::isfinite(D) || D <= 0.0)
    throw std::domain_error("warped_potential: divergent profile integral");
  RadialPotential p;
  p.n = m.n;
  p.inner_radius = t0;
  p.outer_radius = t1;
  WarpedModel model = m;
  p.value = [model, t0, t1, D](double r) {
    return profile_integral(model, t0 + r, t1) / D;
  };
  p.slope = [model, t0, D](double r) {
    return -std::pow(model.g(t0 + r), -double(model.n)) / D;
  };
  return p;
}

bool hyperbolicity_indicator(const WarpedModel& m) {
  double t0 = m.kind == WarpedModel::Kind::Closed ? m.t_min + 1.0 : 1.0;
  double I = profile_integral(m, t0, std::numeric_limits<double>::infinity());
  return std::isfinite(I);
}

ComparisonReport equality_check_remark(const WarpedModel& m, double t0, double H0,
                                       double rel_tol) {
  double cap = warped_ball_capacity(m, t0, std::numeric_limits<double>::infinity());
  double boundary = fiber_volume_unit(m) * std::pow(m.g(t0), m.n);
  double bound = (m.n - 1) * H0 * boundary;
  ComparisonReport rep;
  rep.computed_curve = {{t0}, {cap}};
  rep.bound_curve = {{t0}, {bound}};
  rep.worst_slack = cap - bound;
  rep.context = "capacity vs (n-1) H0 boundary volume";
  double tol = rel_tol * std::max(std::fabs(cap), std::fabs(bound));
  if (std::fabs(rep.worst_slack) <= tol)
    rep.verdict = Verdict::Equality;
  else if (rep.worst_slack > 0.0)
    rep.verdict = Verdict::Holds;
  else
    rep.verdict = Verdict::Fails;
  return rep;
}

}  // namespace cap

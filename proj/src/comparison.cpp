#include "cap/comparison.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

namespace cap {

CurvatureProfile CurvatureProfile::constant(Quantity q, double c, double r_max) {
  CurvatureProfile p;
  p.quantity = q;
  p.value = [c](double) { return c; };
  p.r_max = r_max;
  return p;
}

CurvatureProfile CurvatureProfile::table(Quantity q,
                                         const std::vector<std::pair<double, double>>& pts,
                                         double r_max) {
  auto curve = std::make_shared<PchipCurve>(pts);
  CurvatureProfile p;
  p.quantity = q;
  p.value = [curve](double r) { return curve->value(r); };
  p.r_max = r_max;
  return p;
}

CurvatureProfile::Sign CurvatureProfile::certify(int samples, double tol) const {
  bool nonpos = true, nonneg = true;
  for (int i = 0; i <= samples; ++i) {
    double r = r_max * double(i) / double(samples);
    double v = value(r);
    if (v > tol) nonpos = false;
    if (v < -tol) nonneg = false;
  }
  if (nonpos) return Sign::Nonpositive;
  if (nonneg) return Sign::Nonnegative;
  return Sign::Mixed;
}

namespace {

struct StopRule {
  double low = -1e300;   // stop when f < low
  double mag = 1e9;      // stop when |f| > mag
};

// Fixed-step RK4 for f' = rhs(r, f). Halves the step until two successive
// grids agree pointwise at the coarse nodes, then returns the finer one.
FlowResult rk4_refined(const std::function<double(double, double)>& rhs, double f0, double r_max,
                       double step, double accept_tol, const StopRule& stop) {
  auto run = [&](double h, int keep_every) {
    FlowResult res;
    res.curve.r.push_back(0.0);
    res.curve.v.push_back(f0);
    double f = f0, r = 0.0;
    long nsteps = std::lround(std::ceil(r_max / h - 1e-12));
    for (long i = 0; i < nsteps; ++i) {
      double hh = std::min(h, r_max - r);
      double k1 = rhs(r, f);
      double k2 = rhs(r + 0.5 * hh, f + 0.5 * hh * k1);
      double k3 = rhs(r + 0.5 * hh, f + 0.5 * hh * k2);
      double k4 = rhs(r + hh, f + hh * k3);
      f += hh / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      r += hh;
      if (!std::isfinite(f) || std::fabs(f) > stop.mag) {
        res.stop_r = r;
        res.stop_reason = "blow-up";
        return res;
      }
      if (f < stop.low) {
        res.stop_r = r;
        res.stop_reason = "blow-down";
        return res;
      }
      if (f < 0.0) res.crossed_zero = true;
      if ((i + 1) % keep_every == 0 || i + 1 == nsteps) {
        res.curve.r.push_back(r);
        res.curve.v.push_back(f);
      }
    }
    res.completed = true;
    res.stop_r = r;
    res.stop_reason = "r_max";
    return res;
  };

  // All grids report values at multiples of the original step so successive
  // refinements compare pointwise at shared nodes.
  double h = step;
  FlowResult coarse = run(h, 1);
  int keep = 1;
  for (int halving = 0; halving < 14; ++halving) {
    h *= 0.5;
    keep *= 2;
    FlowResult fine = run(h, keep);
    bool same_stop = fine.stop_reason == coarse.stop_reason;
    double diff = 0.0;
    size_t m = std::min(coarse.curve.r.size(), fine.curve.r.size());
    for (size_t i = 0; i < m; ++i) diff = std::max(diff, std::fabs(coarse.curve.v[i] - fine.curve.v[i]));
    if (same_stop && diff < accept_tol) return fine;
    coarse = std::move(fine);
  }
  return coarse;
}

}  // namespace

FlowResult riccati_flow(const CurvatureProfile& sec, double f0, double r_max, double step,
                        double accept_tol) {
  if (sec.quantity != CurvatureProfile::Quantity::Sectional)
    throw std::invalid_argument("riccati_flow: needs a sectional profile");
  if (f0 <= 0.0) throw std::invalid_argument("riccati_flow: f0 must be positive");
  auto rhs = [&sec](double r, double f) { return -sec.value(r) - f * f; };
  StopRule stop;
  stop.low = 1e-9;
  return rk4_refined(rhs, f0, r_max, step, accept_tol, stop);
}

double riccati_lower_bound(double f0, double r) { return f0 / (1.0 + f0 * r); }

FlowResult mean_curvature_flow(const CurvatureProfile& ric, double H0, int n, double r_max,
                               std::function<double(double)> umbilicity, double step,
                               double accept_tol) {
  if (ric.quantity != CurvatureProfile::Quantity::Ricci)
    throw std::invalid_argument("mean_curvature_flow: needs a Ricci profile");
  if (n < 1) throw std::invalid_argument("mean_curvature_flow: n must be >= 1");
  if (!umbilicity) umbilicity = [](double) { return 1.0; };
  auto rhs = [&ric, &umbilicity, n](double r, double H) {
    double u = umbilicity(r);
    // |sigma|^2 >= n H^2 with equality for umbilic spheres; u scales the gap.
    return -ric.value(r) / n - u * H * H;
  };
  StopRule stop;  // crossing zero is allowed, only magnitude blow-up stops
  return rk4_refined(rhs, H0, r_max, step, accept_tol, stop);
}

double mean_curvature_upper_bound(double H0, double r) { return H0 / (1.0 + H0 * r); }

double transplant_laplacian(const RadialPotential& potential,
                            const std::function<double(double)>& mean_curvature, double r) {
  // value''(r) from the analytic slope by central differencing; the radial
  // potentials expose slope in closed form, so the second derivative is the
  // only numerical step.
  double h = 1e-6 * std::max(1.0, std::fabs(r) + potential.inner_radius);
  double d2 = (potential.slope(r + h) - potential.slope(r - h)) / (2.0 * h);
  return d2 + potential.n * mean_curvature(r) * potential.slope(r);
}

ComparisonReport compare_flow_to_bound(const FlowResult& flow,
                                       const std::function<double(double)>& bound, bool lower,
                                       double equality_tol) {
  ComparisonReport rep;
  rep.computed_curve = flow.curve;
  rep.bound_curve.r = flow.curve.r;
  rep.bound_curve.v.reserve(flow.curve.r.size());
  double worst = std::numeric_limits<double>::infinity();
  double max_abs = 0.0;
  for (size_t i = 0; i < flow.curve.r.size(); ++i) {
    double b = bound(flow.curve.r[i]);
    rep.bound_curve.v.push_back(b);
    double slack = lower ? flow.curve.v[i] - b : b - flow.curve.v[i];
    worst = std::min(worst, slack);
    max_abs = std::max(max_abs, std::fabs(flow.curve.v[i] - b));
  }
  rep.worst_slack = worst;
  if (max_abs <= equality_tol)
    rep.verdict = Verdict::Equality;
  else
    rep.verdict = worst >= -equality_tol ? Verdict::Holds : Verdict::Fails;
  rep.context = lower ? "flow >= comparison curve" : "flow <= comparison curve";
  return rep;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Equality: return "equality";
    case Verdict::Fails: return "fails";
    case Verdict::Inapplicable: return "inapplicable";
  }
  return "unknown";
}

}  // namespace cap

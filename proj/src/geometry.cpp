#include "cap/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "cap/quadrature.hpp"

namespace cap {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Nearest point on the ellipsoid sum (x_i/e_i)^2 = 1 to y, centered frame.
// Solves sum (e_i^2 y_i / (e_i^2 + t))^2 = 1 for the largest root t with a
// bracketed Newton iteration. Components are nudged off the symmetry planes
// by a relative 1e-12 so the bracket endpoint stays a pole; the induced
// error in the foot point is of the same order.
Vec3 ellipsoid_foot(const Vec3& semi, const Vec3& y_in) {
  const double e[3] = {semi.x, semi.y, semi.z};
  double y[3] = {y_in.x, y_in.y, y_in.z};
  const double scale = std::max({e[0], e[1], e[2]});
  const double nudge = 1e-12 * scale;
  double sgn[3];
  for (int i = 0; i < 3; ++i) {
    sgn[i] = y[i] < 0 ? -1.0 : 1.0;
    y[i] = std::abs(y[i]);
    if (y[i] < nudge) y[i] = nudge;
  }
  const double emin = std::min({e[0], e[1], e[2]});
  const double emax = scale;

  auto F = [&](double t, double* dF) {
    double s = -1.0, d = 0.0;
    for (int i = 0; i < 3; ++i) {
      double q = e[i] * y[i] / (e[i] * e[i] + t);
      s += q * q;
      d += -2.0 * q * q / (e[i] * e[i] + t);
    }
    if (dF) *dF = d;
    return s;
  };

  // F is strictly decreasing on (-emin^2, inf), +inf at the left end, so the
  // unique root there gives the global foot point. Safeguarded Newton.
  double r = std::sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]);
  double lo = -emin * emin;
  double hi = std::max(emax * r, emax * emax);
  while (F(hi, nullptr) > 0) hi *= 2.0;
  double t = F(0.0, nullptr) > 0 ? 0.5 * hi : 0.5 * lo;
  for (int it = 0; it < 200; ++it) {
    double d;
    double f = F(t, &d);
    if (f > 0)
      lo = t;
    else
      hi = t;
    double tn = (d != 0.0) ? t - f / d : t;
    if (!(tn > lo && tn < hi)) tn = 0.5 * (lo + hi);
    if (std::abs(tn - t) <= 1e-16 * (std::abs(t) + emin * emin)) {
      t = tn;
      break;
    }
    t = tn;
  }
  Vec3 x{e[0] * e[0] * y[0] / (e[0] * e[0] + t), e[1] * e[1] * y[1] / (e[1] * e[1] + t),
         e[2] * e[2] * y[2] / (e[2] * e[2] + t)};
  return {sgn[0] * x.x, sgn[1] * x.y, sgn[2] * x.z};
}

double ellipsoid_inside_value(const Vec3& semi, const Vec3& p) {
  double s = (p.x / semi.x) * (p.x / semi.x) + (p.y / semi.y) * (p.y / semi.y) +
             (p.z / semi.z) * (p.z / semi.z);
  return s;  // <= 1 inside
}

}  // namespace

struct ConvexBody::Impl {
  Kind kind = Kind::GenericSdf;
  int dim = 3;
  bool smooth = true;
  bool bounded = true;
  bool distance_exact = true;
  double bounding_radius = 0.0;
  Vec3 center{0, 0, 0};
  std::optional<Vec3> axis;
  std::string descriptor_text;
  std::vector<ConvexBody> members;

  // Ball
  double radius = 0.0;
  // Ellipsoid
  Vec3 semi{1, 1, 1};
  // Slab
  Vec3 slab_normal{0, 0, 1};
  double slab_lo = 0.0, slab_hi = 0.0;
  // Generic
  std::function<double(const Vec3&)> generic_sdf;
  // Parallel offset applied on top of the base shape.
  double parallel_r = 0.0;

  double sdf(const Vec3& p) const;
  Vec3 project(const Vec3& p) const;
  Vec3 project_base(const Vec3& p) const;  // without the parallel offset
  double sdf_base(const Vec3& p) const;
};

namespace {

// Exact nearest point on the rim circle of a two-ball intersection, used
// when neither face projection is feasible (p sits in the rim's normal cone).
std::optional<Vec3> two_ball_rim(const std::vector<ConvexBody>& members, const Vec3& p) {
  if (members.size() != 2) return std::nullopt;
  for (const auto& m : members)
    if (m.kind() != ConvexBody::Kind::Ball || m.dimension() != 3) return std::nullopt;
  Vec3 c1 = members[0].center(), c2 = members[1].center();
  double r1 = members[0].ball_radius(), r2 = members[1].ball_radius();
  Vec3 d = c2 - c1;
  double D = d.norm();
  if (D < 1e-14) return std::nullopt;
  Vec3 a = d / D;
  double x = 0.5 * (D + (r1 * r1 - r2 * r2) / D);
  double rho2 = r1 * r1 - x * x;
  if (rho2 <= 0) return std::nullopt;  // one ball swallows the other
  double rho = std::sqrt(rho2);
  Vec3 m = c1 + a * x;
  Vec3 radial = (p - m) - a * dot(p - m, a);
  double rn = radial.norm();
  if (rn < 1e-14) radial = any_orthogonal(a), rn = 1.0;
  return m + radial * (rho / rn);
}

// Dykstra's alternating projection scheme for intersections of convex sets.
Vec3 dykstra_project(const std::vector<ConvexBody>& members, const Vec3& p, double scale) {
  // Single-projection shortcut: any member projection that lands inside all
  // other members is the exact nearest point of the intersection.
  const double ftol = 1e-12 * scale;
  for (const auto& m : members) {
    Vec3 q = m.project(p);
    bool ok = true;
    for (const auto& other : members) {
      if (&other == &m) continue;
      if (other.sdf(q) > ftol) {
        ok = false;
        break;
      }
    }
    if (ok) return q;
  }
  if (auto rim = two_ball_rim(members, p)) return *rim;
  Vec3 x = p;
  std::vector<Vec3> inc(members.size(), Vec3{0, 0, 0});
  const double tol = 1e-13 * scale;
  for (int cycle = 0; cycle < 4000; ++cycle) {
    double moved = 0.0;
    for (size_t i = 0; i < members.size(); ++i) {
      Vec3 w = x + inc[i];
      Vec3 q = members[i].project(w);
      inc[i] = w - q;
      moved += (x - q).norm();
      x = q;
    }
    if (moved < tol) break;
  }
  return x;
}

}  // namespace

double ConvexBody::Impl::sdf_base(const Vec3& p) const {
  switch (kind) {
    case Kind::Ball:
      return (p - center).norm() - radius;
    case Kind::Ellipsoid: {
      Vec3 q = p - center;
      Vec3 foot = ellipsoid_foot(semi, q);
      double d = (q - foot).norm();
      return ellipsoid_inside_value(semi, q) <= 1.0 ? -d : d;
    }
    case Kind::Slab: {
      double s = dot(p, slab_normal);
      return std::max(slab_lo - s, s - slab_hi);
    }
    case Kind::Intersection: {
      double m = -kInf;
      for (const auto& mem : members) m = std::max(m, mem.sdf(p));
      if (m <= 0.0) return m;
      Vec3 q = dykstra_project(members, p, std::max(1.0, bounding_radius));
      return (p - q).norm();
    }
    case Kind::GenericSdf:
      return generic_sdf(p);
  }
  return 0.0;
}

double ConvexBody::Impl::sdf(const Vec3& p) const { return sdf_base(p) - parallel_r; }

Vec3 ConvexBody::Impl::project_base(const Vec3& p) const {
  switch (kind) {
    case Kind::Ball: {
      Vec3 d = p - center;
      double r = d.norm();
      if (r <= radius) return p;
      return center + d * (radius / r);
    }
    case Kind::Ellipsoid: {
      Vec3 q = p - center;
      if (ellipsoid_inside_value(semi, q) <= 1.0) return p;
      return center + ellipsoid_foot(semi, q);
    }
    case Kind::Slab: {
      double s = dot(p, slab_normal);
      if (s < slab_lo) return p + slab_normal * (slab_lo - s);
      if (s > slab_hi) return p - slab_normal * (s - slab_hi);
      return p;
    }
    case Kind::Intersection: {
      double m = -kInf;
      for (const auto& mem : members) m = std::max(m, mem.sdf(p));
      if (m <= 0.0) return p;
      return dykstra_project(members, p, std::max(1.0, bounding_radius));
    }
    case Kind::GenericSdf:
      return p;  // handled by the descent in metric_projection
  }
  return p;
}

Vec3 ConvexBody::Impl::project(const Vec3& p) const {
  if (parallel_r == 0.0) return project_base(p);
  double d = sdf(p);
  if (d <= 0.0) return p;
  Vec3 xi = project_base(p);
  Vec3 v = p - xi;
  double vn = v.norm();
  if (vn < 1e-300) return p;
  return xi + v * (parallel_r / vn);
}

ConvexBody ConvexBody::ball(const Vec3& center, double radius, int dimension) {
  if (radius <= 0.0) throw std::invalid_argument("ball radius must be positive");
  if (dimension < 2) throw std::invalid_argument("ball dimension must be at least 2");
  ConvexBody b;
  b.impl_ = std::make_shared<Impl>();
  auto& im = *b.impl_;
  im.kind = Kind::Ball;
  im.dim = dimension;
  im.center = center;
  im.radius = radius;
  im.bounding_radius = center.norm() + radius;
  im.axis = Vec3{0, 0, 1};
  return b;
}

ConvexBody ConvexBody::ellipsoid(const Vec3& center, const Vec3& semi_axes) {
  if (semi_axes.x <= 0 || semi_axes.y <= 0 || semi_axes.z <= 0)
    throw std::invalid_argument("ellipsoid semi-axes must be positive");
  ConvexBody b;
  b.impl_ = std::make_shared<Impl>();
  auto& im = *b.impl_;
  im.kind = Kind::Ellipsoid;
  im.center = center;
  im.semi = semi_axes;
  im.bounding_radius = center.norm() + std::max({semi_axes.x, semi_axes.y, semi_axes.z});
  // Spheroid axis: the odd one out when exactly two semi-axes agree.
  const double a = semi_axes.x, bb = semi_axes.y, c = semi_axes.z;
  auto close = [](double u, double v) { return std::abs(u - v) <= 1e-12 * std::max(u, v); };
  if (close(a, bb) && close(bb, c))
    im.axis = Vec3{0, 0, 1};
  else if (close(a, bb))
    im.axis = Vec3{0, 0, 1};
  else if (close(a, c))
    im.axis = Vec3{0, 1, 0};
  else if (close(bb, c))
    im.axis = Vec3{1, 0, 0};
  return b;
}

ConvexBody ConvexBody::slab(const Vec3& normal, double lo, double hi) {
  double nn = normal.norm();
  if (nn <= 0) throw std::invalid_argument("slab normal must be nonzero");
  if (!(lo < hi)) throw std::invalid_argument("slab needs lo < hi");
  ConvexBody b;
  b.impl_ = std::make_shared<Impl>();
  auto& im = *b.impl_;
  im.kind = Kind::Slab;
  im.bounded = false;
  im.slab_normal = normal / nn;
  im.slab_lo = lo;
  im.slab_hi = hi;
  im.center = im.slab_normal * (0.5 * (lo + hi));
  im.bounding_radius = 0.0;
  im.axis = im.slab_normal;
  return b;
}

ConvexBody ConvexBody::intersection(std::vector<ConvexBody> members) {
  if (members.size() < 2) throw std::invalid_argument("intersection needs at least two members");
  ConvexBody b;
  b.impl_ = std::make_shared<Impl>();
  auto& im = *b.impl_;
  im.kind = Kind::Intersection;
  im.smooth = false;
  double bound = kInf;
  Vec3 csum{0, 0, 0};
  int nbounded = 0;
  for (const auto& m : members) {
    if (m.bounded()) {
      bound = std::min(bound, m.bounding_radius());
      csum = csum + m.center();
      ++nbounded;
    }
  }
  if (nbounded == 0)
    throw std::invalid_argument("intersection must contain at least one bounded member");
  im.bounding_radius = bound;
  im.center = csum / double(nbounded);
  // Axis of a two-ball lens: the line of centers. Otherwise require every
  // member to share one axis direction.
  std::optional<Vec3> axis;
  if (nbounded >= 2) {
    Vec3 c0, c1;
    bool have0 = false, have1 = false;
    for (const auto& m : members)
      if (m.bounded()) {
        if (!have0) {
          c0 = m.center();
          have0 = true;
        } else if (!have1) {
          c1 = m.center();
          have1 = true;
        }
      }
    if (have1 && (c1 - c0).norm() > 1e-12) axis = (c1 - c0).normalized();
  }
  if (!axis) {
    axis = Vec3{0, 0, 1};
    for (const auto& m : members) {
      auto ma = m.symmetry_axis();
      if (!ma) {
        axis.reset();
        break;
      }
      if (std::abs(dot(*ma, *axis)) < 1.0 - 1e-9 && m.kind() != Kind::Ball) {
        axis.reset();
        break;
      }
    }
  }
  im.axis = axis;
  im.members = std::move(members);
  return b;
}

ConvexBody ConvexBody::from_sdf(std::function<double(const Vec3&)> sdf, double bounding_radius,
                                bool smooth, bool distance_exact) {
  if (!sdf) throw std::invalid_argument("from_sdf needs a callable");
  if (bounding_radius <= 0) throw std::invalid_argument("bounding radius must be positive");
  ConvexBody b;
  b.impl_ = std::make_shared<Impl>();
  auto& im = *b.impl_;
  im.kind = Kind::GenericSdf;
  im.smooth = smooth;
  im.distance_exact = distance_exact;
  im.bounding_radius = bounding_radius;
  im.generic_sdf = std::move(sdf);
  return b;
}

ConvexBody::Kind ConvexBody::kind() const { return impl_->kind; }
int ConvexBody::dimension() const { return impl_->dim; }
bool ConvexBody::smooth() const { return impl_->smooth || impl_->parallel_r > 0.0; }
bool ConvexBody::bounded() const { return impl_->bounded; }
bool ConvexBody::distance_exact() const { return impl_->distance_exact; }
double ConvexBody::bounding_radius() const { return impl_->bounding_radius; }
double ConvexBody::scale() const { return std::max(1.0, impl_->bounding_radius); }
Vec3 ConvexBody::center() const { return impl_->center; }
std::optional<Vec3> ConvexBody::symmetry_axis() const { return impl_->axis; }
const std::vector<ConvexBody>& ConvexBody::members() const { return impl_->members; }
double ConvexBody::ball_radius() const {
  if (impl_->kind != Kind::Ball) throw std::logic_error("ball_radius: not a ball");
  return impl_->radius + impl_->parallel_r;
}
double ConvexBody::sdf(const Vec3& p) const { return impl_->sdf(p); }
Vec3 ConvexBody::project(const Vec3& p) const { return impl_->project(p); }
const std::string& ConvexBody::descriptor_text() const { return impl_->descriptor_text; }
void ConvexBody::set_descriptor_text(std::string text) {
  impl_->descriptor_text = std::move(text);
}

ConvexBody parallel_body(const ConvexBody& body, double r) {
  if (r < 0) throw std::invalid_argument("parallel distance must be nonnegative");
  if (!body.bounded()) throw std::invalid_argument("parallel body of an unbounded body");
  ConvexBody b = body;
  auto im = std::make_shared<ConvexBody::Impl>(*body.impl_);
  im->parallel_r += r;
  im->bounding_radius += r;
  im->descriptor_text.clear();
  b.impl_ = im;
  return b;
}

namespace {

Vec3 fd_gradient(const ConvexBody& body, const Vec3& p, double h) {
  const Vec3 ex{h, 0, 0}, ey{0, h, 0}, ez{0, 0, h};
  return Vec3{body.sdf(p + ex) - body.sdf(p - ex), body.sdf(p + ey) - body.sdf(p - ey),
              body.sdf(p + ez) - body.sdf(p - ez)} /
         (2.0 * h);
}

// Pull q onto the zero level along the gradient.
bool newton_to_surface(const ConvexBody& body, Vec3& q, double tol, int budget = 30) {
  double h = 1e-6 * body.scale();
  for (int it = 0; it < budget; ++it) {
    double d = body.sdf(q);
    if (std::abs(d) <= tol) return true;
    Vec3 g = fd_gradient(body, q, h);
    double g2 = g.norm2();
    if (g2 < 1e-20) return false;
    q = q - g * (d / g2);
  }
  return std::abs(body.sdf(q)) <= tol;
}

Vec3 descent_projection(const ConvexBody& body, const Vec3& p) {
  const double scale = body.scale();
  Vec3 q = p;
  if (!newton_to_surface(body, q, 1e-12 * scale, 60))
    throw std::runtime_error("projection-no-convergence");
  const double h = 1e-6 * scale;
  for (int it = 0; it < 200; ++it) {
    Vec3 g = fd_gradient(body, q, h);
    double gn = g.norm();
    if (gn < 1e-12) break;
    Vec3 nu = g / gn;
    Vec3 d = p - q;
    Vec3 tangential = d - nu * dot(d, nu);
    if (tangential.norm() <= 1e-10 * std::max(1.0, d.norm())) return q;
    double alpha = 1.0;
    double best = d.norm();
    bool accepted = false;
    for (int k = 0; k < 25; ++k) {
      Vec3 trial = q + tangential * alpha;
      if (newton_to_surface(body, trial, 1e-12 * scale, 30) && (p - trial).norm() < best) {
        q = trial;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) return q;
  }
  return q;
}

}  // namespace

Vec3 metric_projection(const ConvexBody& body, const Vec3& p) {
  const double scale = body.scale();
  double d = body.sdf(p);
  if (d <= 0.0) throw std::runtime_error("point-inside-body");
  Vec3 q;
  if (body.kind() == ConvexBody::Kind::GenericSdf)
    q = descent_projection(body, p);
  else
    q = body.project(p);
  if (std::abs(body.sdf(q)) > 1e-8 * scale) throw std::runtime_error("projection-no-convergence");
  if (body.distance_exact()) {
    double r = (p - q).norm();
    if (std::abs(r - d) > 1e-9 * std::max(r, scale))
      throw std::runtime_error("projection-no-convergence");
  }
  return q;
}

Vec3 outer_normal(const ConvexBody& body, const Vec3& p) {
  const double scale = body.scale();
  Vec3 g = fd_gradient(body, p, 1e-6 * scale);
  double gn = g.norm();
  Vec3 nu0 = gn > 1e-12 ? g / gn : Vec3{0, 0, 1};
  const double eps = 1e-4 * scale;
  Vec3 off = p + nu0 * eps;
  if (body.sdf(off) <= 0.0) return nu0;
  Vec3 xi = body.kind() == ConvexBody::Kind::GenericSdf ? descent_projection(body, off)
                                                        : body.project(off);
  Vec3 v = off - xi;
  double vn = v.norm();
  return vn > 1e-12 * scale ? v / vn : nu0;
}

namespace {

// 6 tetrahedra around the main diagonal v0-v7 of a cube; vertex bit i of the
// index encodes the offset along axis i.
constexpr int kTets[6][4] = {{0, 1, 3, 7}, {0, 3, 2, 7}, {0, 2, 6, 7},
                             {0, 6, 4, 7}, {0, 4, 5, 7}, {0, 5, 1, 7}};

Vec3 edge_crossing(const ConvexBody& body, const Vec3& a, double da, const Vec3& b, double db) {
  double t = da / (da - db);
  Vec3 lo = a, hi = b;
  double flo = da, fhi = db;
  Vec3 x = a + (b - a) * t;
  for (int it = 0; it < 3; ++it) {
    double fx = body.sdf(x);
    if (fx == 0.0) return x;
    if ((fx < 0) == (flo < 0)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
      fhi = fx;
    }
    double denom = flo - fhi;
    double s = denom != 0.0 ? flo / denom : 0.5;
    s = std::clamp(s, 0.05, 0.95);
    x = lo + (hi - lo) * s;
  }
  return x;
}

struct Tri {
  Vec3 a, b, c;
};

std::vector<Tri> extract_zero_surface(const ConvexBody& body, int resolution) {
  const double R = body.bounding_radius() * 1.05 + 1e-9;
  const Vec3 lo{-R, -R, -R};
  const int n = resolution;
  const double h = 2.0 * R / n;
  const int m = n + 1;
  std::vector<float> val(size_t(m) * m * m);
  auto idx = [m](int i, int j, int k) { return (size_t(k) * m + j) * m + i; };
  for (int k = 0; k < m; ++k)
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i)
        val[idx(i, j, k)] =
            float(body.sdf(Vec3{lo.x + i * h, lo.y + j * h, lo.z + k * h}));
  std::vector<Tri> tris;
  Vec3 corner[8];
  double d[8];
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        bool anyneg = false, anypos = false;
        for (int v = 0; v < 8; ++v) {
          int ii = i + (v & 1), jj = j + ((v >> 1) & 1), kk = k + ((v >> 2) & 1);
          d[v] = val[idx(ii, jj, kk)];
          corner[v] = Vec3{lo.x + ii * h, lo.y + jj * h, lo.z + kk * h};
          (d[v] <= 0 ? anyneg : anypos) = true;
        }
        if (!anyneg || !anypos) continue;
        for (const auto& tet : kTets) {
          int in[4], nin = 0, out[4], nout = 0;
          for (int v = 0; v < 4; ++v) {
            if (d[tet[v]] <= 0)
              in[nin++] = tet[v];
            else
              out[nout++] = tet[v];
          }
          if (nin == 0 || nin == 4) continue;
          auto cross_pt = [&](int a, int b) {
            return edge_crossing(body, corner[a], d[a], corner[b], d[b]);
          };
          if (nin == 1) {
            tris.push_back({cross_pt(in[0], out[0]), cross_pt(in[0], out[1]),
                            cross_pt(in[0], out[2])});
          } else if (nin == 3) {
            tris.push_back({cross_pt(in[0], out[0]), cross_pt(in[1], out[0]),
                            cross_pt(in[2], out[0])});
          } else {
            // Quad ordered so consecutive corners share a tetrahedron face.
            Vec3 q0 = cross_pt(in[0], out[0]);
            Vec3 q1 = cross_pt(in[1], out[0]);
            Vec3 q2 = cross_pt(in[1], out[1]);
            Vec3 q3 = cross_pt(in[0], out[1]);
            tris.push_back({q0, q1, q2});
            tris.push_back({q0, q2, q3});
          }
        }
      }
  return tris;
}

}  // namespace

std::vector<SurfaceSample> boundary_samples(const ConvexBody& body, int resolution) {
  if (!body.bounded()) throw std::invalid_argument("boundary_samples: unbounded body");
  if (resolution < 4) throw std::invalid_argument("boundary_samples: resolution too small");
  auto tris = extract_zero_surface(body, resolution);
  std::vector<SurfaceSample> out;
  out.reserve(tris.size());
  const double polish_tol = 1e-9 * body.scale();
  const double grad_h = 1e-6 * body.scale();
  for (const auto& t : tris) {
    double w = 0.5 * cross(t.b - t.a, t.c - t.a).norm();
    if (w <= 0) continue;
    Vec3 q = (t.a + t.b + t.c) / 3.0;
    newton_to_surface(body, q, polish_tol);
    Vec3 g = fd_gradient(body, q, grad_h);
    double gn = g.norm();
    out.push_back({q, gn > 1e-12 ? g / gn : Vec3{0, 0, 1}, w});
  }
  return out;
}

namespace {

// Shape operator eigenvalues from differencing the unit normal field of the
// sdf around x, in an arbitrary tangent frame.
std::array<double, 2> shape_eigenvalues(const ConvexBody& body, const Vec3& x, double delta) {
  const double gh = std::min(1e-6 * body.scale(), 0.1 * delta);
  auto unit_grad = [&](const Vec3& q) {
    Vec3 g = fd_gradient(body, q, gh);
    double n = g.norm();
    if (n < 1e-14) throw std::runtime_error("degenerate-gradient");
    return g / n;
  };
  Vec3 n0 = unit_grad(x);
  Vec3 e1 = any_orthogonal(n0);
  Vec3 e2 = cross(n0, e1);
  Vec3 c1 = (unit_grad(x + e1 * delta) - unit_grad(x - e1 * delta)) / (2.0 * delta);
  Vec3 c2 = (unit_grad(x + e2 * delta) - unit_grad(x - e2 * delta)) / (2.0 * delta);
  double a = dot(e1, c1);
  double b = 0.5 * (dot(e1, c2) + dot(e2, c1));
  double c = dot(e2, c2);
  double mean = 0.5 * (a + c);
  double disc = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
  return {mean - disc, mean + disc};
}

}  // namespace

std::array<double, 2> principal_curvatures(const ConvexBody& body, const Vec3& p, double probe) {
  const double scale = body.scale();
  if (std::abs(body.sdf(p)) > 1e-6 * scale)
    throw std::invalid_argument("principal_curvatures: point not on the boundary");
  if (body.smooth()) {
    double delta = probe > 0 ? probe : 1e-4 * scale;
    return shape_eigenvalues(body, p, delta);
  }
  // Probe offset surfaces at t, t/2, t/4 and pull back: a curvature mu of
  // the parallel surface at distance t comes from kappa = mu / (1 - t mu).
  const double t0 = probe > 0 ? probe : 1e-2 * scale;
  Vec3 nu = outer_normal(body, p);
  std::array<std::array<double, 2>, 3> pulled{};
  std::array<std::array<bool, 2>, 3> infinite{};
  for (int s = 0; s < 3; ++s) {
    double t = t0 / (1 << s);
    Vec3 x = p + nu * t;
    double delta = std::min(1e-4 * scale, 0.2 * t);
    auto mu = shape_eigenvalues(body, x, delta);
    for (int i = 0; i < 2; ++i) {
      double tm = t * mu[i];
      infinite[s][i] = tm > 0.8;
      pulled[s][i] = tm < 1.0 - 1e-3 ? mu[i] / (1.0 - tm) : kInf;
    }
  }
  std::array<double, 2> out{};
  for (int i = 0; i < 2; ++i) {
    if (infinite[0][i] && infinite[1][i] && infinite[2][i]) {
      out[i] = kInf;
      continue;
    }
    if (infinite[0][i] || infinite[1][i] || infinite[2][i])
      throw std::runtime_error("ridge-point");
    double r0 = 2.0 * pulled[1][i] - pulled[0][i];
    double r1 = 2.0 * pulled[2][i] - pulled[1][i];
    if (std::abs(r1 - r0) > 0.5 * std::max(1.0, std::abs(r1)))
      throw std::runtime_error("ridge-point");
    out[i] = r1;
  }
  if (out[0] > out[1]) std::swap(out[0], out[1]);
  return out;
}

LambdaReport lambda_convexity_check(const ConvexBody& body, double lambda, int samples,
                                    double tol) {
  if (lambda <= 0) throw std::invalid_argument("lambda must be positive");
  int res = std::clamp(int(std::ceil(std::sqrt(double(samples)))) * 2, 24, 96);
  auto all = boundary_samples(body, res);
  if (all.empty()) throw std::runtime_error("lambda_convexity_check: empty surface");
  size_t stride = std::max<size_t>(1, all.size() / std::max(1, samples));
  const double reach = 1.0 / lambda;
  double worst = kInf;
  int checked = 0;
  for (size_t i = 0; i < all.size(); i += stride) {
    Vec3 nu = outer_normal(body, all[i].point);
    Vec3 c = all[i].point - nu * reach;
    double far2 = 0.0;
    for (const auto& s : all) far2 = std::max(far2, (s.point - c).norm2());
    worst = std::min(worst, reach - std::sqrt(far2));
    ++checked;
  }
  return {worst >= -tol * std::max(1.0, reach), worst, checked};
}

double minkowski_residual(const ConvexBody& body, const Vec3& center, int resolution) {
  auto samples = boundary_samples(body, resolution);
  double acc = 0.0, total = 0.0;
  for (const auto& s : samples) {
    auto k = principal_curvatures(body, s.point);
    double H = 0.5 * (k[0] + k[1]);
    Vec3 X = s.point - center;
    acc += s.weight * (1.0 + H * dot(X, s.normal * -1.0));
    total += s.weight;
  }
  if (total <= 0) throw std::runtime_error("minkowski_residual: empty surface");
  return std::abs(acc) / total;
}

double area(const ConvexBody& body, int resolution) {
  if (body.kind() == ConvexBody::Kind::Ball && body.dimension() != 3) {
    int n = body.dimension() - 1;
    return unit_sphere_area(n) * std::pow(body.ball_radius(), n);
  }
  auto tris = extract_zero_surface(body, resolution);
  double a = 0.0;
  for (const auto& t : tris) a += 0.5 * cross(t.b - t.a, t.c - t.a).norm();
  return a;
}

double volume(const ConvexBody& body, int resolution) {
  if (!body.bounded()) throw std::invalid_argument("volume: unbounded body");
  if (body.kind() == ConvexBody::Kind::Ball && body.dimension() != 3) {
    int n = body.dimension() - 1;
    double R = body.ball_radius();
    return unit_sphere_area(n) * std::pow(R, n + 1) / double(n + 1);
  }
  const double R = body.bounding_radius() * 1.05 + 1e-9;
  const int n = resolution;
  const double h = 2.0 * R / n;
  double vol = 0.0;
  const double cell = h * h * h;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        Vec3 c{-R + (i + 0.5) * h, -R + (j + 0.5) * h, -R + (k + 0.5) * h};
        double s = body.sdf(c);
        if (s <= -h) {
          vol += cell;
        } else if (s < h) {
          vol += cell * std::clamp(0.5 - s / h, 0.0, 1.0);
        }
      }
  return vol;
}

void ConvexBody::validate(int samples, unsigned seed) const {
  const double R = bounded() ? bounding_radius() : 1.0;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.6 * R, 1.6 * R);
  auto rnd = [&] { return Vec3{u(rng), u(rng), u(rng)}; };
  std::vector<Vec3> inside;
  for (int it = 0; it < samples; ++it) {
    Vec3 a = rnd(), b = rnd();
    double da = sdf(a), db = sdf(b);
    double lip = std::abs(da - db) - (a - b).norm();
    if (lip > 1e-9 * scale() + 1e-9 * (a - b).norm())
      throw std::runtime_error("validate: sdf violates the 1-Lipschitz bound");
    if (da <= 0) inside.push_back(a);
  }
  for (size_t i = 1; i < inside.size(); ++i) {
    Vec3 mid = (inside[i - 1] + inside[i]) * 0.5;
    if (sdf(mid) > 1e-9 * scale())
      throw std::runtime_error("validate: sublevel set is not convex");
  }
  if (bounded()) {
    std::uniform_real_distribution<double> su(-1.0, 1.0);
    for (int it = 0; it < 64; ++it) {
      Vec3 dir{su(rng), su(rng), su(rng)};
      if (dir.norm() < 1e-6) continue;
      Vec3 p = dir.normalized() * (1.2 * R + 1.0);
      if (sdf(p) <= 0)
        throw std::runtime_error("validate: sdf not positive outside the bounding sphere");
    }
  }
}

}  // namespace cap

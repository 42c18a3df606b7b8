#include "cap/pde_solver.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <deque>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace cap {
namespace {

// Fluid nodes closer than kThetaSnap * h to a boundary are snapped onto it
// (Dirichlet node); keeping them would put O(1/(theta h^2)) rows into the
// matrix and ruin both conditioning and the meaning of a relative residual.
constexpr double kThetaSnap = 1e-3;

struct Csr {
  std::vector<int> row_ptr, col;
  std::vector<double> val, diag;
  int n = 0;

  void multiply(const std::vector<double>& x, std::vector<double>& y) const {
    for (int r = 0; r < n; ++r) {
      double s = 0.0;
      for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) s += val[k] * x[col[k]];
      y[r] = s;
    }
  }

  // SSOR preconditioner application: w = omega (2 - omega) (D + omega U)^-1 D (D + omega L)^-1 v.
  void apply_ssor(const std::vector<double>& v, std::vector<double>& w, double omega,
                  std::vector<double>& scratch) const {
    auto& t = scratch;
    for (int r = 0; r < n; ++r) {
      double s = v[r];
      for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
        int c = col[k];
        if (c < r) s -= omega * val[k] * t[c];
      }
      t[r] = s / diag[r];
    }
    double f = omega * (2.0 - omega);
    for (int r = 0; r < n; ++r) t[r] *= f * diag[r];
    for (int r = n - 1; r >= 0; --r) {
      double s = t[r];
      for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
        int c = col[k];
        if (c > r) s -= omega * val[k] * w[c];
      }
      w[r] = s / diag[r];
    }
  }
};

double dot_v(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm_v(const std::vector<double>& a) { return std::sqrt(dot_v(a, a)); }

// Right-preconditioned BiCGStab. Returns (relative residual, iterations).
std::pair<double, int> bicgstab(const Csr& A, const std::vector<double>& b,
                                std::vector<double>& x, double rel_tol, int max_iter,
                                double omega_ssor) {
  const int n = A.n;
  x.assign(n, 0.0);
  double bnorm = norm_v(b);
  if (bnorm == 0.0) return {0.0, 0};
  std::vector<double> r = b, rhat = b, p(n, 0.0), v(n, 0.0), s(n), t(n);
  std::vector<double> phat(n), shat(n), scratch(n), tmp(n);
  double rho = 1.0, alpha = 1.0, w = 1.0;
  int it = 0;
  for (; it < max_iter; ++it) {
    double rho1 = dot_v(rhat, r);
    if (std::abs(rho1) < 1e-300) {
      rhat = r;
      rho1 = dot_v(r, r);
      if (rho1 < 1e-300) break;
      p.assign(n, 0.0);
      v.assign(n, 0.0);
      rho = alpha = w = 1.0;
    }
    double beta = (rho1 / rho) * (alpha / w);
    for (int i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - w * v[i]);
    A.apply_ssor(p, phat, omega_ssor, scratch);
    A.multiply(phat, v);
    double rv = dot_v(rhat, v);
    if (std::abs(rv) < 1e-300) {
      rhat = r;
      rho = 1.0;
      continue;
    }
    alpha = rho1 / rv;
    for (int i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    if (norm_v(s) <= rel_tol * bnorm) {
      for (int i = 0; i < n; ++i) x[i] += alpha * phat[i];
      rho = rho1;
      break;
    }
    A.apply_ssor(s, shat, omega_ssor, scratch);
    A.multiply(shat, t);
    double tt = dot_v(t, t);
    if (tt < 1e-300) {
      for (int i = 0; i < n; ++i) x[i] += alpha * phat[i];
      break;
    }
    w = dot_v(t, s) / tt;
    for (int i = 0; i < n; ++i) {
      x[i] += alpha * phat[i] + w * shat[i];
      r[i] = s[i] - w * t[i];
    }
    if (norm_v(r) <= rel_tol * bnorm) {
      ++it;
      break;
    }
    rho = rho1;
  }
  A.multiply(x, tmp);
  for (int i = 0; i < n; ++i) tmp[i] = b[i] - tmp[i];
  return {norm_v(tmp) / bnorm, it};
}

// Root of sdf along p + t d on (0, h], sdf(p) > 0, sdf(p + h d) <= 0.
double body_cut(const ConvexBody& body, const Vec3& p, const Vec3& d, double h) {
  double lo = 0.0, hi = h;
  double flo = body.sdf(p), fhi = body.sdf(p + d * h);
  if (fhi > 0.0) return h;  // caller misjudged; treat as full arm
  const double tol = 1e-12 * h;
  double t = hi;
  for (int it = 0; it < 120 && hi - lo > tol; ++it) {
    double denom = flo - fhi;
    t = denom > 0 ? lo + (hi - lo) * std::clamp(flo / denom, 0.05, 0.95) : 0.5 * (lo + hi);
    double ft = body.sdf(p + d * t);
    if (ft > 0.0)
      lo = t, flo = ft;
    else
      hi = t, fhi = ft;
  }
  return 0.5 * (lo + hi);
}

// Crossing of |p + t d - c| = R with |p - c| < R, d unit, on (0, h].
double sphere_cut(const Vec3& p, const Vec3& d, const Vec3& c, double R) {
  Vec3 q = p - c;
  double b = dot(q, d);
  double disc = b * b + R * R - q.norm2();
  return -b + std::sqrt(std::max(0.0, disc));
}

struct Arm {
  double theta = 1.0;   // arm length / h
  double value = 0.0;   // Dirichlet value when nb < 0
  int nb = -1;          // fluid index of the neighbor, -1 for a cut, -2 for axis mirror
};

// Node classes: 0 fluid, 1 inside body, 2 outside sphere, 3 snapped to the
// body boundary (u = 1), 4 snapped to the outer sphere (u = 0).

struct BuiltGrid {
  GridMode mode;
  double h, R;
  Vec3 c, a, e1;
  int n1, n2, n3;
  double z0;
  int ndirs;
  std::vector<std::uint8_t> cls;
  std::vector<int> fluid_of_node;  // -1 when not fluid
  std::vector<int> node_of_fluid;
  std::vector<Arm> arms;  // nfluid * ndirs

  size_t node_index(int i, int j, int k) const { return (size_t(k) * n2 + j) * n1 + i; }

  Vec3 point(int i, int j, int k) const {
    if (mode == GridMode::Axisymmetric) return c + e1 * (i * h) + a * (z0 + j * h);
    return c + Vec3{-R + i * h, -R + j * h, -R + k * h};
  }
};

constexpr int kDir4[4][3] = {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}};
constexpr int kDir6[6][3] = {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0},
                             {0, 1, 0},  {0, 0, -1}, {0, 0, 1}};

BuiltGrid build_grid(const ConvexBody& body, GridMode mode, double h, double R) {
  BuiltGrid g;
  g.mode = mode;
  g.h = h;
  g.R = R;
  g.c = body.center();
  g.a = body.symmetry_axis().value_or(Vec3{0, 0, 1});
  g.e1 = any_orthogonal(g.a);
  const int m = int(std::ceil(R / h - 1e-12));
  if (mode == GridMode::Axisymmetric) {
    g.n1 = m + 2;  // rho = 0 .. (m+1) h covers the sphere
    g.n2 = 2 * m + 3;
    g.n3 = 1;
    g.z0 = -(m + 1) * h;
    g.ndirs = 4;
  } else {
    g.n1 = g.n2 = g.n3 = 2 * m + 3;
    g.z0 = 0.0;
    g.ndirs = 6;
    if (double(g.n1) * g.n2 * g.n3 > 4.2e7) throw std::invalid_argument("grid-too-large");
  }

  const size_t total = size_t(g.n1) * g.n2 * g.n3;
  g.cls.assign(total, 2);
  g.fluid_of_node.assign(total, -1);
  const double R2 = R * R;
  for (int k = 0; k < g.n3; ++k)
    for (int j = 0; j < g.n2; ++j)
      for (int i = 0; i < g.n1; ++i) {
        Vec3 p = g.point(i, j, k);
        double rad2 = (p - g.c).norm2();
        std::uint8_t cl;
        if (rad2 >= R2) {
          cl = 2;
        } else {
          double s = body.sdf(p);
          cl = s > 0.0 ? 0 : 1;
        }
        g.cls[g.node_index(i, j, k)] = cl;
      }

  const auto* dirs = mode == GridMode::Axisymmetric ? kDir4 : kDir6;
  auto arm_dir3 = [&](int d) {
    Vec3 dir{double(dirs[d][0]), double(dirs[d][1]), double(dirs[d][2])};
    return mode == GridMode::Axisymmetric ? g.e1 * dir.x + g.a * dir.y : dir;
  };

  // Snap pass: fluid nodes whose cut arm crosses a boundary within
  // kThetaSnap * h become Dirichlet nodes of that boundary.
  for (size_t node = 0; node < total; ++node) {
    if (g.cls[node] != 0) continue;
    int i = int(node % g.n1), j = int((node / g.n1) % g.n2), k = int(node / (size_t(g.n1) * g.n2));
    Vec3 p = g.point(i, j, k);
    for (int d = 0; d < g.ndirs; ++d) {
      if (mode == GridMode::Axisymmetric && d == 0 && i == 0) continue;
      int ii = i + dirs[d][0], jj = j + dirs[d][1], kk = k + dirs[d][2];
      bool in_grid = ii >= 0 && ii < g.n1 && jj >= 0 && jj < g.n2 && kk >= 0 && kk < g.n3;
      std::uint8_t ncl = in_grid ? g.cls[g.node_index(ii, jj, kk)] : std::uint8_t(2);
      if (ncl == 0 || ncl == 3 || ncl == 4) continue;
      double t = ncl == 1 ? body_cut(body, p, arm_dir3(d), h) : sphere_cut(p, arm_dir3(d), g.c, R);
      if (t < kThetaSnap * h) {
        g.cls[node] = ncl == 1 ? 3 : 4;
        break;
      }
    }
  }

  for (size_t node = 0; node < total; ++node)
    if (g.cls[node] == 0) {
      g.fluid_of_node[node] = int(g.node_of_fluid.size());
      g.node_of_fluid.push_back(int(node));
    }

  const int nf = int(g.node_of_fluid.size());
  if (nf == 0) throw std::runtime_error("empty-fluid-region");
  g.arms.assign(size_t(nf) * g.ndirs, Arm{});

  for (int f = 0; f < nf; ++f) {
    size_t node = size_t(g.node_of_fluid[f]);
    int i = int(node % g.n1), j = int((node / g.n1) % g.n2), k = int(node / (size_t(g.n1) * g.n2));
    Vec3 p = g.point(i, j, k);
    double sp = body.sdf(p);
    for (int d = 0; d < g.ndirs; ++d) {
      Arm& arm = g.arms[size_t(f) * g.ndirs + d];
      int ii = i + dirs[d][0], jj = j + dirs[d][1], kk = k + dirs[d][2];
      if (mode == GridMode::Axisymmetric && d == 0 && i == 0) {
        arm.nb = -2;  // axis mirror
        continue;
      }
      bool in_grid = ii >= 0 && ii < g.n1 && jj >= 0 && jj < g.n2 && kk >= 0 && kk < g.n3;
      std::uint8_t ncl = in_grid ? g.cls[g.node_index(ii, jj, kk)] : std::uint8_t(2);
      Vec3 dir3 = arm_dir3(d);
      if (ncl == 0) {
        // Interior arm; guard against a chord clipping the body between nodes.
        if (sp < 2.0 * h && body.sdf(p + dir3 * (0.5 * h)) <= 0.0)
          throw std::runtime_error("domain-too-thin");
        arm.theta = 1.0;
        arm.nb = g.fluid_of_node[g.node_index(ii, jj, kk)];
      } else if (ncl == 3 || ncl == 4) {
        arm.theta = 1.0;
        arm.value = ncl == 3 ? 1.0 : 0.0;
        arm.nb = -1;
      } else if (ncl == 1) {
        double t = body_cut(body, p, dir3, h);
        arm.theta = std::clamp(t / h, kThetaSnap, 1.0);
        arm.value = 1.0;
        arm.nb = -1;
      } else {
        double t = sphere_cut(p, dir3, g.c, R);
        arm.theta = std::clamp(t / h, kThetaSnap, 1.0);
        arm.value = 0.0;
        arm.nb = -1;
      }
    }
  }
  return g;
}

void check_connectivity(const BuiltGrid& g) {
  const int nf = int(g.node_of_fluid.size());
  std::vector<char> seen(nf, 0);
  std::deque<int> queue;
  for (int f = 0; f < nf; ++f)
    for (int d = 0; d < g.ndirs; ++d) {
      const Arm& a = g.arms[size_t(f) * g.ndirs + d];
      if (a.nb == -1 && a.value == 0.0) {
        if (!seen[f]) seen[f] = 1, queue.push_back(f);
        break;
      }
    }
  while (!queue.empty()) {
    int f = queue.front();
    queue.pop_front();
    for (int d = 0; d < g.ndirs; ++d) {
      int nb = g.arms[size_t(f) * g.ndirs + d].nb;
      if (nb >= 0 && !seen[nb]) {
        seen[nb] = 1;
        queue.push_back(nb);
      }
    }
  }
  for (int f = 0; f < nf; ++f)
    if (!seen[f]) throw std::runtime_error("disconnected-fluid-region");
}

// Assembles -(Laplace) u = 0 with Shortley-Weller arms; Dirichlet data goes
// to the right-hand side.
void assemble(const BuiltGrid& g, Csr& A, std::vector<double>& rhs) {
  const int nf = int(g.node_of_fluid.size());
  A.n = nf;
  A.row_ptr.assign(nf + 1, 0);
  rhs.assign(nf, 0.0);
  A.diag.assign(nf, 0.0);
  std::vector<std::pair<int, double>> row;
  std::vector<int> cols;
  std::vector<double> vals;
  cols.reserve(size_t(nf) * (g.ndirs + 1));
  vals.reserve(size_t(nf) * (g.ndirs + 1));

  for (int f = 0; f < nf; ++f) {
    size_t node = size_t(g.node_of_fluid[f]);
    int i = int(node % g.n1);
    const Arm* arm = &g.arms[size_t(f) * g.ndirs];
    row.clear();
    double diag = 0.0;

    auto add_pair = [&](const Arm& lo, const Arm& hi, double clo, double chi, double cc) {
      diag -= cc;
      if (lo.nb >= 0)
        row.push_back({lo.nb, -clo});
      else if (lo.nb == -1)
        rhs[f] += clo * lo.value;
      if (hi.nb >= 0)
        row.push_back({hi.nb, -chi});
      else
        rhs[f] += chi * hi.value;
    };

    if (g.mode == GridMode::Axisymmetric) {
      const double h = g.h, rho = i * h;
      const Arm &L = arm[0], &R = arm[1], &D = arm[2], &U = arm[3];
      if (i == 0) {
        double b = R.theta * h;
        double cR = 4.0 / (b * b);
        diag -= -cR;
        if (R.nb >= 0)
          row.push_back({R.nb, -cR});
        else
          rhs[f] += cR * R.value;
      } else {
        double a = L.theta * h, b = R.theta * h;
        double cL = (2.0 - b / rho) / (a * (a + b));
        double cR = (2.0 + a / rho) / (b * (a + b));
        double cC = (-2.0 + (b - a) / rho) / (a * b);
        add_pair(L, R, cL, cR, cC);
      }
      double az = D.theta * g.h, bz = U.theta * g.h;
      add_pair(D, U, 2.0 / (az * (az + bz)), 2.0 / (bz * (az + bz)), -2.0 / (az * bz));
    } else {
      for (int d = 0; d < 3; ++d) {
        const Arm &lo = arm[2 * d], &hi = arm[2 * d + 1];
        double a = lo.theta * g.h, b = hi.theta * g.h;
        add_pair(lo, hi, 2.0 / (a * (a + b)), 2.0 / (b * (a + b)), -2.0 / (a * b));
      }
    }

    if (!(diag > 0)) throw std::runtime_error("assembly-lost-diagonal-dominance");
    // Jacobi equilibration: unit diagonal keeps row magnitudes comparable, so
    // the solver's relative residual is meaningful for every node.
    row.push_back({f, diag});
    std::sort(row.begin(), row.end());
    for (auto& [c, v] : row) {
      cols.push_back(c);
      vals.push_back(v / diag);
    }
    rhs[f] /= diag;
    A.row_ptr[f + 1] = int(cols.size());
    A.diag[f] = 1.0;
  }
  A.col = std::move(cols);
  A.val = std::move(vals);
}

double energy_capacity(const BuiltGrid& g, const std::vector<double>& uf) {
  const int nf = int(g.node_of_fluid.size());
  double E = 0.0;
  auto term_value = [&](const Arm& a) { return a.nb >= 0 ? uf[a.nb] : a.value; };
  for (int f = 0; f < nf; ++f) {
    size_t node = size_t(g.node_of_fluid[f]);
    int i = int(node % g.n1);
    const Arm* arm = &g.arms[size_t(f) * g.ndirs];
    double uc = uf[f];
    if (g.mode == GridMode::Axisymmetric) {
      const double h = g.h, rho = i * h;
      // rho+ arm owned by this node; rho- only when it ends on a boundary.
      {
        const Arm& R = arm[1];
        double d = R.theta * h;
        double du = (term_value(R) - uc) / d;
        E += du * du * 2.0 * M_PI * (rho + 0.5 * d) * d * h;
      }
      if (i > 0 && arm[0].nb == -1) {
        const Arm& L = arm[0];
        double d = L.theta * h;
        double du = (term_value(L) - uc) / d;
        E += du * du * 2.0 * M_PI * (rho - 0.5 * d) * d * h;
      }
      double wz = i > 0 ? 2.0 * M_PI * rho * h : M_PI * h * h * 0.25;
      {
        const Arm& U = arm[3];
        double d = U.theta * h;
        double du = (term_value(U) - uc) / d;
        E += du * du * wz * d;
      }
      if (arm[2].nb == -1) {
        const Arm& D = arm[2];
        double d = D.theta * h;
        double du = (term_value(D) - uc) / d;
        E += du * du * wz * d;
      }
    } else {
      for (int d3 = 0; d3 < 3; ++d3) {
        const Arm& hi = arm[2 * d3 + 1];
        double d = hi.theta * g.h;
        double du = (term_value(hi) - uc) / d;
        E += du * du * d * g.h * g.h;
        const Arm& lo = arm[2 * d3];
        if (lo.nb == -1) {
          double dl = lo.theta * g.h;
          double dul = (term_value(lo) - uc) / dl;
          E += dul * dul * dl * g.h * g.h;
        }
      }
    }
  }
  return E;
}

// Shortley-Weller first derivative from the two arms of one direction.
double sw_derivative(double a, double b, double ul, double uc, double ur) {
  return -b / (a * (a + b)) * ul + (b - a) / (a * b) * uc + a / (b * (a + b)) * ur;
}

void nodal_gradients(const BuiltGrid& g, const std::vector<double>& uf, PotentialField& out) {
  const int nf = int(g.node_of_fluid.size());
  const size_t total = size_t(g.n1) * g.n2 * g.n3;
  out.g1.assign(total, 0.0);
  out.g2.assign(total, 0.0);
  if (g.mode == GridMode::Full3d) out.g3.assign(total, 0.0);
  auto term_value = [&](const Arm& a) { return a.nb >= 0 ? uf[a.nb] : a.value; };
  for (int f = 0; f < nf; ++f) {
    size_t node = size_t(g.node_of_fluid[f]);
    const Arm* arm = &g.arms[size_t(f) * g.ndirs];
    double uc = uf[f];
    int i = int(node % g.n1);
    if (g.mode == GridMode::Axisymmetric) {
      if (i > 0)
        out.g1[node] = sw_derivative(arm[0].theta * g.h, arm[1].theta * g.h, term_value(arm[0]),
                                     uc, term_value(arm[1]));
      out.g2[node] = sw_derivative(arm[2].theta * g.h, arm[3].theta * g.h, term_value(arm[2]), uc,
                                   term_value(arm[3]));
    } else {
      double* gs[3] = {&out.g1[node], &out.g2[node], &out.g3[node]};
      for (int d = 0; d < 3; ++d)
        *gs[d] = sw_derivative(arm[2 * d].theta * g.h, arm[2 * d + 1].theta * g.h,
                               term_value(arm[2 * d]), uc, term_value(arm[2 * d + 1]));
    }
  }
}

bool axisymmetric_enough(const ConvexBody& body) {
  auto axis = body.symmetry_axis();
  if (!axis) return false;
  Vec3 a = *axis, c = body.center();
  Vec3 e1 = any_orthogonal(a), e2 = cross(a, e1);
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> ur(0.15, 1.1), uphi(0.0, 2.0 * M_PI),
      uz(-1.1, 1.1);
  double b = body.bounding_radius();
  for (int it = 0; it < 80; ++it) {
    double rho = ur(rng) * b, z = uz(rng) * b, phi = uphi(rng), phi2 = uphi(rng);
    Vec3 p = c + (e1 * std::cos(phi) + e2 * std::sin(phi)) * rho + a * z;
    Vec3 q = c + (e1 * std::cos(phi2) + e2 * std::sin(phi2)) * rho + a * z;
    if (std::abs(body.sdf(p) - body.sdf(q)) > 1e-7 * body.scale()) return false;
  }
  return true;
}

}  // namespace

double flux_at_offset(const PotentialField& field, const ConvexBody& body, double offset_mult,
                      int resolution) {
  if (field.g1.empty()) throw std::logic_error("flux_at_offset: field has no gradients");
  const double off = offset_mult * field.h;
  auto samples = boundary_samples(parallel_body(body, off), resolution);
  double flux = 0.0;
  const double h = field.h;
  if (field.mode == GridMode::Axisymmetric) {
    Vec3 e2 = cross(field.axis, field.eperp);
    (void)e2;
    for (const auto& s : samples) {
      Vec3 q = s.point - field.center;
      double z = dot(q, field.axis);
      Vec3 rad = q - field.axis * z;
      double rho = rad.norm();
      Vec3 er = rho > 1e-12 ? rad / rho : Vec3{0, 0, 0};
      double fi = rho / h, fj = (z - field.z0) / h;
      int i = std::clamp(int(std::floor(fi)), 0, field.n1 - 2);
      int j = std::clamp(int(std::floor(fj)), 0, field.n2 - 2);
      double tx = fi - i, ty = fj - j;
      double grho = 0.0, gz = 0.0, wsum = 0.0;
      for (int dj = 0; dj <= 1; ++dj)
        for (int di = 0; di <= 1; ++di) {
          size_t node = size_t(j + dj) * field.n1 + (i + di);
          if (field.cls[node] != 0) continue;
          double w = (di ? tx : 1 - tx) * (dj ? ty : 1 - ty);
          grho += w * field.g1[node];
          gz += w * field.g2[node];
          wsum += w;
        }
      if (wsum <= 0) continue;
      grho /= wsum;
      gz /= wsum;
      Vec3 grad = er * grho + field.axis * gz;
      flux -= s.weight * dot(grad, s.normal);
    }
  } else {
    for (const auto& s : samples) {
      Vec3 q = s.point - field.center;
      double fx = (q.x + field.outer_radius) / h;
      double fy = (q.y + field.outer_radius) / h;
      double fz = (q.z + field.outer_radius) / h;
      int i = std::clamp(int(std::floor(fx)), 0, field.n1 - 2);
      int j = std::clamp(int(std::floor(fy)), 0, field.n2 - 2);
      int k = std::clamp(int(std::floor(fz)), 0, field.n3 - 2);
      double tx = fx - i, ty = fy - j, tz = fz - k;
      Vec3 grad{0, 0, 0};
      double wsum = 0.0;
      for (int dk = 0; dk <= 1; ++dk)
        for (int dj = 0; dj <= 1; ++dj)
          for (int di = 0; di <= 1; ++di) {
            size_t node = (size_t(k + dk) * field.n2 + (j + dj)) * field.n1 + (i + di);
            if (field.cls[node] != 0) continue;
            double w = (di ? tx : 1 - tx) * (dj ? ty : 1 - ty) * (dk ? tz : 1 - tz);
            grad += Vec3{field.g1[node], field.g2[node], field.g3[node]} * w;
            wsum += w;
          }
      if (wsum <= 0) continue;
      grad = grad / wsum;
      flux -= s.weight * dot(grad, s.normal);
    }
  }
  return flux;
}

PotentialField solve_exterior(const ConvexBody& body, const SolverOptions& opts) {
  if (!body.bounded()) throw std::invalid_argument("solve_exterior: unbounded body");
  const double h = opts.h > 0 ? opts.h : 0.02 * body.scale();
  const double R = opts.outer_radius;
  if (!(R > body.bounding_radius() + 3.0 * h))
    throw std::invalid_argument("outer-radius-too-small");

  GridMode mode = opts.mode;
  if (mode == GridMode::Auto)
    mode = axisymmetric_enough(body) ? GridMode::Axisymmetric : GridMode::Full3d;
  else if (mode == GridMode::Axisymmetric && !axisymmetric_enough(body))
    throw std::invalid_argument("body-not-axisymmetric");

  BuiltGrid g = build_grid(body, mode, h, R);
  check_connectivity(g);
  Csr A;
  std::vector<double> rhs, uf;
  assemble(g, A, rhs);
  auto [resid, iters] = bicgstab(A, rhs, uf, opts.rel_tol, opts.max_iter, opts.ssor_omega);
  if (resid > std::max(1e-8, 10.0 * opts.rel_tol))
    throw std::runtime_error("linear-solver-no-convergence");

  double lo = 0.0, hi = 1.0;
  for (double v : uf) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (lo < -1e-6 || hi > 1.0 + 1e-6) throw std::runtime_error("potential-out-of-range");
  for (double& v : uf) v = std::clamp(v, 0.0, 1.0);

  PotentialField out;
  out.mode = mode;
  out.h = h;
  out.outer_radius = R;
  out.center = g.c;
  out.axis = g.a;
  out.eperp = g.e1;
  out.n1 = g.n1;
  out.n2 = g.n2;
  out.n3 = g.n3;
  out.z0 = g.z0;
  out.residual = resid;
  out.iterations = iters;
  out.cls = g.cls;
  out.u.assign(g.cls.size(), 0.0);
  for (size_t n = 0; n < g.cls.size(); ++n) {
    if (g.cls[n] == 1 || g.cls[n] == 3) out.u[n] = 1.0;
    if (out.cls[n] == 3) out.cls[n] = 1;  // snapped nodes report as boundary
    if (out.cls[n] == 4) out.cls[n] = 2;
  }
  for (size_t f = 0; f < g.node_of_fluid.size(); ++f) out.u[g.node_of_fluid[f]] = uf[f];
  out.cap_energy = energy_capacity(g, uf);
  nodal_gradients(g, uf, out);
  out.cap_flux = flux_at_offset(out, body, opts.flux_offset_mult, opts.flux_resolution);
  return out;
}

MonotonicityReport check_potential_monotonicity(const PotentialField& small_body,
                                                const PotentialField& large_body, double tol) {
  const PotentialField &a = small_body, &b = large_body;
  auto near_eq = [](double x, double y) {
    return std::abs(x - y) <= 1e-12 * std::max(1.0, std::abs(x));
  };
  if (a.mode != b.mode || a.n1 != b.n1 || a.n2 != b.n2 || a.n3 != b.n3 || !near_eq(a.h, b.h) ||
      !near_eq(a.outer_radius, b.outer_radius) || !near_eq(a.z0, b.z0) ||
      (a.center - b.center).norm() > 1e-12 || (a.axis - b.axis).norm() > 1e-12)
    throw std::invalid_argument("grid-layout-mismatch");
  MonotonicityReport rep;
  double worst = -1e300;
  for (size_t n = 0; n < a.u.size(); ++n) {
    if (a.cls[n] != 0 || b.cls[n] != 0) continue;
    worst = std::max(worst, a.u[n] - b.u[n]);
    ++rep.nodes_compared;
  }
  rep.max_violation = rep.nodes_compared ? std::max(0.0, worst) : 0.0;
  rep.passed = rep.max_violation <= tol;
  return rep;
}

ExhaustionResult exhaustion_capacity(const ConvexBody& body, const ExhaustionOptions& opts) {
  ExhaustionResult res;
  const double h0 = opts.h > 0 ? opts.h : 0.02 * body.scale();
  const double R0 = opts.outer0 > 0 ? opts.outer0 : 2.0 * body.bounding_radius();
  const int budget = std::max(2, opts.levels);

  // Least squares fit of 1/cap against 1/R; the intercept is 1/cap at
  // infinite truncation radius.
  auto fit = [](const std::vector<ExhaustionLevel>& pts, size_t from) -> double {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (size_t i = from; i < pts.size(); ++i) {
      double x = 1.0 / pts[i].outer_radius, y = 1.0 / pts[i].cap;
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++n;
    }
    double det = n * sxx - sx * sx;
    if (std::abs(det) < 1e-300) return 0.0;
    return (sy * sxx - sx * sxy) / det;  // intercept alpha = 1/cap_inf
  };

  // Levels are a budget: stop as soon as adding a level moves the fitted
  // whole-space estimate by less than `plateau` relative. The raw truncated
  // capacities converge like 1/R, far too slowly to plateau themselves.
  double factor = 1.0;
  double prev_estimate = 0.0;
  bool plateaued = false;
  for (int l = 0; l < budget && !plateaued; ++l) {
    double Rl = R0 * std::pow(opts.growth, l);
    double hl = l < int(opts.h_schedule.size()) && opts.h_schedule[l] > 0 ? opts.h_schedule[l] : h0;
    SolverOptions so;
    so.h = hl;
    so.outer_radius = Rl;
    so.mode = opts.mode;
    so.flux_offset_mult = opts.flux_offset_mult;
    PotentialField field = solve_exterior(body, so);
    if (l == 0) {
      res.mode = field.mode;
      if (opts.richardson) {
        SolverOptions half = so;
        half.h = 0.5 * hl;
        PotentialField fh = solve_exterior(body, half);
        double extrap = 2.0 * fh.cap_flux - field.cap_flux;
        factor = extrap / field.cap_flux;
      }
    }
    ExhaustionLevel lev;
    lev.outer_radius = Rl;
    lev.h = hl;
    lev.cap_energy = field.cap_energy;
    lev.cap_flux = field.cap_flux;
    lev.cap = field.cap_flux * factor;
    lev.iterations = field.iterations;
    lev.residual = field.residual;
    res.levels.push_back(lev);

    if (res.levels.size() >= 2) {
      double a = fit(res.levels, 0);
      double estimate = a > 0 ? 1.0 / a : 0.0;
      if (res.levels.size() >= 3 && estimate > 0 && prev_estimate > 0 &&
          std::abs(estimate - prev_estimate) <= opts.plateau * estimate)
        plateaued = true;
      prev_estimate = estimate;
    }
  }
  res.richardson_factor = factor;

  double alpha = fit(res.levels, 0);
  if (!(alpha > 0)) {
    res.capacity = res.levels.back().cap;
    res.converged = false;
    res.error_indicator = 1.0;
    return res;
  }
  res.capacity = 1.0 / alpha;

  double beta;
  {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = int(res.levels.size());
    for (const auto& l : res.levels) {
      double x = 1.0 / l.outer_radius, y = 1.0 / l.cap;
      sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    beta = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  double fit_res = 0.0;
  for (const auto& l : res.levels) {
    double pred = alpha + beta / l.outer_radius;
    fit_res = std::max(fit_res, std::abs(pred - 1.0 / l.cap) * l.cap);
  }
  res.fit_residual = fit_res;

  double tail_gap = 0.0;
  if (res.levels.size() >= 3) {
    double alpha_tail = fit(res.levels, 1);
    if (alpha_tail > 0) tail_gap = std::abs(1.0 / alpha_tail - res.capacity) / res.capacity;
  }
  const auto& last = res.levels.back();
  double ef_gap = std::abs(last.cap_energy - last.cap_flux) / std::max(1e-300, last.cap_flux);
  res.error_indicator = std::max({fit_res, tail_gap, 0.5 * ef_gap});
  res.converged = plateaued;
  return res;
}

void export_potential(const PotentialField& field, const std::string& path_base) {
  if constexpr (std::endian::native != std::endian::little)
    throw std::runtime_error("export_potential: little-endian host required");
  std::ofstream hdr(path_base + ".hdr");
  if (!hdr) throw std::runtime_error("export_potential: cannot write header");
  hdr.precision(17);
  hdr << "format capacity-potential 1\n";
  hdr << "mode " << (field.mode == GridMode::Axisymmetric ? "axisym" : "full3d") << "\n";
  hdr << "h " << field.h << "\n";
  hdr << "outer_radius " << field.outer_radius << "\n";
  hdr << "center " << field.center.x << " " << field.center.y << " " << field.center.z << "\n";
  hdr << "axis " << field.axis.x << " " << field.axis.y << " " << field.axis.z << "\n";
  hdr << "eperp " << field.eperp.x << " " << field.eperp.y << " " << field.eperp.z << "\n";
  hdr << "z0 " << field.z0 << "\n";
  hdr << "dims " << field.n1 << " " << field.n2 << " " << field.n3 << "\n";
  hdr << "order i-fastest\n";
  hdr << "payload u-float64-le count " << field.u.size() << " then cls-uint8\n";
  hdr << "residual " << field.residual << "\n";
  hdr << "iterations " << field.iterations << "\n";
  hdr << "cap_energy " << field.cap_energy << "\n";
  hdr << "cap_flux " << field.cap_flux << "\n";
  std::ofstream bin(path_base + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("export_potential: cannot write payload");
  bin.write(reinterpret_cast<const char*>(field.u.data()),
            std::streamsize(field.u.size() * sizeof(double)));
  bin.write(reinterpret_cast<const char*>(field.cls.data()), std::streamsize(field.cls.size()));
  if (!bin) throw std::runtime_error("export_potential: write failed");
}

PotentialField load_potential(const std::string& path_base) {
  std::ifstream hdr(path_base + ".hdr");
  if (!hdr) throw std::runtime_error("load_potential: missing header");
  PotentialField f;
  std::string line;
  size_t count = 0;
  while (std::getline(hdr, line)) {
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "mode") {
      std::string m;
      ss >> m;
      f.mode = m == "axisym" ? GridMode::Axisymmetric : GridMode::Full3d;
    } else if (key == "h")
      ss >> f.h;
    else if (key == "outer_radius")
      ss >> f.outer_radius;
    else if (key == "center")
      ss >> f.center.x >> f.center.y >> f.center.z;
    else if (key == "axis")
      ss >> f.axis.x >> f.axis.y >> f.axis.z;
    else if (key == "eperp")
      ss >> f.eperp.x >> f.eperp.y >> f.eperp.z;
    else if (key == "z0")
      ss >> f.z0;
    else if (key == "dims")
      ss >> f.n1 >> f.n2 >> f.n3;
    else if (key == "payload") {
      std::string a, b;
      ss >> a >> b >> count;
    } else if (key == "residual")
      ss >> f.residual;
    else if (key == "iterations")
      ss >> f.iterations;
    else if (key == "cap_energy")
      ss >> f.cap_energy;
    else if (key == "cap_flux")
      ss >> f.cap_flux;
  }
  size_t expect = size_t(f.n1) * f.n2 * f.n3;
  if (count != expect) throw std::runtime_error("load_potential: inconsistent header");
  std::ifstream bin(path_base + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("load_potential: missing payload");
  f.u.resize(expect);
  f.cls.resize(expect);
  bin.read(reinterpret_cast<char*>(f.u.data()), std::streamsize(expect * sizeof(double)));
  bin.read(reinterpret_cast<char*>(f.cls.data()), std::streamsize(expect));
  if (!bin) throw std::runtime_error("load_potential: truncated payload");
  return f;
}

}  // namespace cap

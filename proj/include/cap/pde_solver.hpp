#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cap/geometry.hpp"
#include "cap/vec.hpp"

namespace cap {

/// Discretization mode for the exterior Laplace problem.
enum class GridMode { Auto, Axisymmetric, Full3d };

struct SolverOptions {
  double h = 0.0;            // grid spacing; <= 0 picks 0.02 * scale
  double outer_radius = 0.0; // truncation sphere radius (required, > bounding + 3h)
  GridMode mode = GridMode::Auto;
  double rel_tol = 1e-10;    // linear-solver relative residual target
  int max_iter = 100000;
  double ssor_omega = 1.25;
  double flux_offset_mult = 3.0;  // flux surface at offset_mult * h from the body
  int flux_resolution = 96;       // mesh resolution of the flux surface
};

/// Solved truncated exterior potential: u = 1 on the body boundary, u = 0 on
/// the sphere |x - center| = outer_radius, harmonic in between.
struct PotentialField {
  GridMode mode = GridMode::Axisymmetric;
  double h = 0.0;
  double outer_radius = 0.0;
  Vec3 center;        // grid center (body center)
  Vec3 axis;          // axis direction (axisymmetric mode)
  Vec3 eperp;         // radial unit vector completing the frame
  int n1 = 0, n2 = 0, n3 = 1;  // node counts: (rho, z, 1) or (x, y, z)
  // Node values, index ((k * n2) + j) * n1 + i. Solid nodes carry 1, nodes
  // outside the truncation sphere carry 0.
  std::vector<double> u;
  std::vector<std::uint8_t> cls;  // 0 fluid, 1 body, 2 outside sphere
  // Nodal first derivatives (Shortley-Weller one-sided near cuts): axisym
  // stores (d/drho, d/dz) in g1, g2; full3d stores (d/dx, d/dy, d/dz).
  // Present after solve_exterior; not part of the export payload.
  std::vector<double> g1, g2, g3;
  double residual = 0.0;
  int iterations = 0;
  double cap_energy = 0.0;
  double cap_flux = 0.0;

  // Axisymmetric node (i, j) sits at rho = i h, z = z0 + j h.
  double z0 = 0.0;
  // Full3d node (i, j, k) sits at center + (-R + i h, -R + j h, -R + k h).
};

PotentialField solve_exterior(const ConvexBody& body, const SolverOptions& opts);

/// Flux of -grad u through the parallel surface at distance offset_mult * h.
/// Used for the cross-check sweep; solve_exterior already stores one value.
double flux_at_offset(const PotentialField& field, const ConvexBody& body,
                      double offset_mult, int resolution = 96);

struct MonotonicityReport {
  bool passed = false;
  double max_violation = 0.0;  // max over common fluid nodes of u_small - u_large
  int nodes_compared = 0;
};

/// Domain monotonicity: a body contained in a larger body must have the
/// pointwise smaller potential. Both fields must share the grid layout.
MonotonicityReport check_potential_monotonicity(const PotentialField& small_body,
                                                const PotentialField& large_body,
                                                double tol = 1e-9);

struct ExhaustionLevel {
  double outer_radius = 0.0;
  double h = 0.0;
  double cap_energy = 0.0;
  double cap_flux = 0.0;
  double cap = 0.0;  // value used in the fit (flux, Richardson-corrected)
  int iterations = 0;
  double residual = 0.0;
};

struct ExhaustionOptions {
  double h = 0.0;          // <= 0 picks the solver default
  double outer0 = 0.0;     // first truncation radius; <= 0 picks 2 * bounding
  double growth = 2.0;
  int levels = 3;  // level budget; the sweep stops early once estimates plateau
  GridMode mode = GridMode::Auto;
  bool richardson = false;  // h/2 correction factor measured on the first level
  double plateau = 0.005;   // relative agreement of successive fitted estimates
  double flux_offset_mult = 3.0;
  std::vector<double> h_schedule;  // optional per-level spacing override
};

struct ExhaustionResult {
  double capacity = 0.0;       // extrapolated to an infinite outer radius
  bool converged = false;      // plateau reached before the level budget ran out
  double error_indicator = 0.0;
  double fit_residual = 0.0;
  double richardson_factor = 1.0;
  GridMode mode = GridMode::Axisymmetric;
  std::vector<ExhaustionLevel> levels;
};

/// Capacity by exhaustion: truncated solves on growing spheres, then a least
/// squares fit of 1/cap against 1/R extrapolated to R = infinity (exact for
/// concentric spheres).
ExhaustionResult exhaustion_capacity(const ConvexBody& body, const ExhaustionOptions& opts);

/// Writes <path_base>.hdr (text header) and <path_base>.bin (flat
/// little-endian doubles, fastest index first). Layout documented in the
/// README. load_potential reads the pair back.
void export_potential(const PotentialField& field, const std::string& path_base);
PotentialField load_potential(const std::string& path_base);

}  // namespace cap

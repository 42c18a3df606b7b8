#pragma once

#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cap/descriptor.hpp"
#include "cap/pde_solver.hpp"
#include "cap/report.hpp"

namespace cap {

/// A parsed scenario file. Top-level keys name the run (id, kind) and
/// reference geometry either inline ([body] + [component], [model],
/// [profile]) or through body_file / model_file. Numeric knobs live in
/// [params]; anything left at its zero value is derived or defaulted at
/// run time.
struct Scenario {
  std::string id;
  std::string kind;
  std::string source_path;
  std::string inputs;  // verbatim scenario text (+ referenced descriptors)

  std::optional<ConvexBody> body;
  std::optional<WarpedModel> model;
  std::optional<CurvatureProfile> profile;

  double H0 = 0.0;  // 0 = derive from geometry per the kind's direction
  double h = 0.0;
  double outer0 = 0.0;
  double growth = 2.0;
  int levels = 3;
  double tol = 0.0;  // extra relative equality tolerance
  double t0 = -1.0;  // radial kinds; exterior models default to 0
  double t1 = std::numeric_limits<double>::infinity();
  std::string method;  // "grid" (default for bodies) | "closed-form" (ball only)
  GridMode mode = GridMode::Auto;
  bool richardson = false;
  double offset_mult = 3.0;
  int resolution = 64;  // boundary mesh resolution for area/curvature sampling
  unsigned seed = 1;
  int samples = 200;       // riccati-suite family size
  int n = 2;               // fiber dimension for riccati mean curvature flows
  std::string family;      // riccati-suite: "sectional" (default) | "ricci"
  double r_max = 4.0;
  double step = 1e-2;
  double f0 = 1.0;  // riccati initial value (H0 on the ricci side)
  double umbilicity = 1.0;
};

Scenario scenario_from_document(const KvDocument& doc);
Scenario load_scenario(const std::string& path);

struct Report {
  std::string id;
  std::string kind;
  std::string inputs;  // echo of the scenario text
  double capacity = 0.0;
  std::string method;
  double error_indicator = 0.0;  // relative
  double bound = 0.0;
  double slack = 0.0;  // capacity - bound, interpreted through the kind
  Verdict verdict = Verdict::Inapplicable;
  double runtime_s = 0.0;
  std::string provenance;  // closed-form | quadrature | grid
  double h = 0.0;          // grid spacing (or ODE step) behind the capacity
  std::string context;     // gates, derivations, notes
};

/// Inequality direction of a kind: +1 capacity >= bound, -1 capacity <=
/// bound, 0 equality expected.
int kind_direction(const std::string& kind);
bool known_kind(const std::string& kind);
/// Report-only kinds are echoed in summaries but never gate the exit code.
bool report_only_kind(const std::string& kind);

/// Pure verdict table: Equality when |slack| <= tol, otherwise Holds or
/// Fails by the kind's direction (equality-expected kinds fail outside the
/// tolerance band).
Verdict verdict_for(const std::string& kind, double slack, double tol);

/// Equality tolerance: max(3 * error_indicator * |capacity|,
/// extra_rel * |capacity|, 1e-8).
double equality_tolerance(double capacity, double error_indicator, double extra_rel);

Report run_scenario(const Scenario& s);

struct SuiteOptions {
  int workers = 0;  // <= 0: CAP_WORKERS env var, else hardware concurrency
  // Overrides applied on top of every scenario when positive.
  double h = 0.0;
  double outer0 = 0.0;
  double growth = 0.0;
  double tol = 0.0;
  std::optional<unsigned> seed;
};

struct SuiteResult {
  std::vector<Report> reports;            // merged in id order
  std::vector<std::string> parse_errors;  // "<path>: <message>"
  int holds = 0, equality = 0, fails = 0, inapplicable = 0;
  int gating_fails = 0;  // fails excluding report-only kinds
  int exit_code = 0;     // 0 all pass, 1 any gating fail, 2 parse errors
};

/// Runs every *.scn file under dir (non-recursive), concurrently up to the
/// worker count, and merges reports deterministically by scenario id.
SuiteResult run_suite(const std::string& dir, const SuiteOptions& opts = {});

/// CSV with header id,kind,capacity,method,bound,slack,verdict,h,runtime;
/// numbers at 12 significant digits. Parsing a row back and reprinting
/// reproduces the numeric fields byte for byte.
void emit_csv(const std::vector<Report>& reports, std::ostream& out);
std::string format_sig12(double v);

}  // namespace cap

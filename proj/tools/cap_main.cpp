// cap: capacity bounds from scenario files.
//
//   cap run <scenario.scn>     run one scenario and print its report
//   cap suite <dir>            run every *.scn in a directory
//   cap radial <model-file>    capacity of a distance ball in a warped model
//   cap body <body-file>       geometric summary of a body descriptor
//
// Exit codes: 0 all pass, 1 any failing verdict, 2 usage or parse errors.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cap/harness.hpp"
#include "cap/quadrature.hpp"
#include "cap/radial_capacity.hpp"

namespace {

struct Overrides {
  double h = 0.0, outer = 0.0, growth = 0.0, tol = 0.0;
  int workers = 0;
  std::string csv;
  unsigned seed = 0;
  bool seed_set = false;
};

void add_override_flags(CLI::App* cmd, Overrides& ov) {
  // --h is part of the documented surface, so help is --help only.
  cmd->set_help_flag("--help", "print help");
  cmd->add_option("--h", ov.h, "grid spacing override");
  cmd->add_option("--outer", ov.outer, "first truncation radius override");
  cmd->add_option("--growth", ov.growth, "truncation growth factor override");
  cmd->add_option("--tol", ov.tol, "extra relative equality tolerance");
  cmd->add_option("--workers", ov.workers, "worker threads (default: CAP_WORKERS env)");
  cmd->add_option("--csv", ov.csv, "write reports as CSV to this path");
  cmd->add_option("--seed", ov.seed, "random seed override")->each([&ov](const std::string&) {
    ov.seed_set = true;
  });
}

void apply_to_scenario(cap::Scenario& s, const Overrides& ov) {
  if (ov.h > 0.0) s.h = ov.h;
  if (ov.outer > 0.0) s.outer0 = ov.outer;
  if (ov.growth > 0.0) s.growth = ov.growth;
  if (ov.tol > 0.0) s.tol = ov.tol;
  if (ov.seed_set) s.seed = ov.seed;
}

cap::SuiteOptions suite_options(const Overrides& ov) {
  cap::SuiteOptions so;
  so.workers = ov.workers;
  so.h = ov.h;
  so.outer0 = ov.outer;
  so.growth = ov.growth;
  so.tol = ov.tol;
  if (ov.seed_set) so.seed = ov.seed;
  return so;
}

bool write_csv(const std::string& path, const std::vector<cap::Report>& reports) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "cap: cannot write " << path << "\n";
    return false;
  }
  cap::emit_csv(reports, out);
  return true;
}

void print_report(const cap::Report& r) {
  std::printf("id        %s\n", r.id.c_str());
  std::printf("kind      %s\n", r.kind.c_str());
  std::printf("capacity  %s  (method %s, error indicator %s, provenance %s)\n",
              cap::format_sig12(r.capacity).c_str(), r.method.c_str(),
              cap::format_sig12(r.error_indicator).c_str(), r.provenance.c_str());
  std::printf("bound     %s\n", cap::format_sig12(r.bound).c_str());
  std::printf("slack     %s\n", cap::format_sig12(r.slack).c_str());
  std::printf("verdict   %s\n", cap::to_string(r.verdict));
  std::printf("runtime   %.3f s\n", r.runtime_s);
  if (!r.context.empty()) std::printf("notes     %s\n", r.context.c_str());
}

int cmd_run(const std::string& path, const Overrides& ov, const std::string& dump_base) {
  cap::Scenario s;
  try {
    s = cap::load_scenario(path);
  } catch (const std::exception& e) {
    std::cerr << "cap run: " << e.what() << "\n";
    return 2;
  }
  apply_to_scenario(s, ov);
  cap::Report rep = cap::run_scenario(s);
  print_report(rep);
  if (!dump_base.empty()) {
    if (!s.body) {
      std::cerr << "cap run: --dump-potential needs a body scenario\n";
      return 2;
    }
    cap::SolverOptions so;
    so.h = s.h;
    so.outer_radius = s.outer0 > 0.0 ? s.outer0 : 2.0 * s.body->bounding_radius();
    so.mode = s.mode;
    so.flux_offset_mult = s.offset_mult;
    cap::PotentialField field = cap::solve_exterior(*s.body, so);
    cap::export_potential(field, dump_base);
    std::printf("potential %s.hdr / %s.bin\n", dump_base.c_str(), dump_base.c_str());
  }
  if (!ov.csv.empty() && !write_csv(ov.csv, {rep})) return 2;
  if (rep.verdict == cap::Verdict::Fails && !cap::report_only_kind(rep.kind)) return 1;
  return 0;
}

int cmd_suite(const std::string& dir, const Overrides& ov) {
  cap::SuiteResult res = cap::run_suite(dir, suite_options(ov));
  std::printf("%-28s %-22s %14s %14s %14s  %s\n", "id", "kind", "capacity", "bound", "slack",
              "verdict");
  for (const cap::Report& r : res.reports)
    std::printf("%-28s %-22s %14.6g %14.6g %14.6g  %s\n", r.id.c_str(), r.kind.c_str(),
                r.capacity, r.bound, r.slack, cap::to_string(r.verdict));
  std::printf("summary: %d holds, %d equality, %d fails, %d inapplicable",
              res.holds, res.equality, res.fails, res.inapplicable);
  if (res.fails > res.gating_fails)
    std::printf(" (%d report-only)", res.fails - res.gating_fails);
  std::printf("\n");
  for (const std::string& e : res.parse_errors) std::cerr << "parse error: " << e << "\n";
  if (!ov.csv.empty() && !write_csv(ov.csv, res.reports)) return 2;
  return res.exit_code;
}

int cmd_radial(const std::string& path, double t0, double t1, int curvature_samples) {
  cap::WarpedModel model;
  try {
    cap::KvDocument doc = cap::load_kv_file(path);
    const cap::KvSection* m = doc.find("model");
    if (!m) throw std::runtime_error(path + ": missing [model] section");
    model = cap::build_model(*m);
  } catch (const std::exception& e) {
    std::cerr << "cap radial: " << e.what() << "\n";
    return 2;
  }
  if (model.kind == cap::WarpedModel::Kind::Exterior && t0 < 0.0) t0 = 0.0;
  if (t0 < 0.0) {
    std::cerr << "cap radial: --t0 is required for closed models\n";
    return 2;
  }
  try {
    double capv = cap::warped_ball_capacity(model, t0, t1);
    double H = cap::sphere_mean_curvature(model, t0);
    double fiber = model.kind == cap::WarpedModel::Kind::Exterior
                       ? model.boundary_area
                       : cap::unit_sphere_area(model.n);
    double barea = fiber * std::pow(model.g(t0), model.n);
    std::printf("profile    %s (n = %d, %s)\n", model.profile_name.c_str(), model.n,
                model.kind == cap::WarpedModel::Kind::Exterior ? "exterior" : "closed");
    std::printf("capacity   %s%s\n", cap::format_sig12(capv).c_str(),
                std::isinf(t1) ? "" : "  (relative, truncated)");
    std::printf("boundary   area %s, mean curvature %s\n", cap::format_sig12(barea).c_str(),
                cap::format_sig12(H).c_str());
    std::printf("(n-1) H vol(boundary) = %s\n",
                cap::format_sig12((model.n - 1) * H * barea).c_str());
    if (model.kind == cap::WarpedModel::Kind::Closed) {
      std::printf("cartan-hadamard certificate: %s\n",
                  cap::is_cartan_hadamard(model, curvature_samples) ? "yes" : "no");
      std::printf("ricci lower bound: %s\n",
                  cap::format_sig12(cap::ricci_radial_lower(model, curvature_samples)).c_str());
    }
    std::printf("hyperbolic (positive capacity): %s\n",
                cap::hyperbolicity_indicator(model) ? "yes" : "no");
  } catch (const std::exception& e) {
    std::cerr << "cap radial: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

int cmd_body(const std::string& path, int resolution, double lambda) {
  std::optional<cap::ConvexBody> loaded;
  try {
    loaded = cap::build_body(cap::load_kv_file(path));
  } catch (const std::exception& e) {
    std::cerr << "cap body: " << e.what() << "\n";
    return 2;
  }
  const cap::ConvexBody& body = *loaded;
  try {
    body.validate();
    std::printf("kind          %s\n",
                body.kind() == cap::ConvexBody::Kind::Ball          ? "ball"
                : body.kind() == cap::ConvexBody::Kind::Ellipsoid   ? "ellipsoid"
                : body.kind() == cap::ConvexBody::Kind::Intersection ? "intersection"
                : body.kind() == cap::ConvexBody::Kind::Slab         ? "halfspace-slab"
                                                                     : "generic-sdf");
    std::printf("dimension     %d, smooth %s, bounding radius %s\n", body.dimension(),
                body.smooth() ? "yes" : "no",
                cap::format_sig12(body.bounding_radius()).c_str());
    double A = cap::area(body, resolution);
    double V = cap::volume(body, resolution);
    std::printf("area          %s   volume %s   (mesh resolution %d)\n",
                cap::format_sig12(A).c_str(), cap::format_sig12(V).c_str(), resolution);

    auto samples = cap::boundary_samples(body, std::min(resolution, 64));
    size_t stride = std::max<size_t>(1, samples.size() / 200);
    double kmin = std::numeric_limits<double>::infinity(), kmax = 0.0;
    bool edge = false;
    for (size_t i = 0; i < samples.size(); i += stride) {
      try {
        auto k = cap::principal_curvatures(body, samples[i].point);
        if (std::isfinite(k[0])) kmin = std::min(kmin, k[0]);
        if (std::isfinite(k[1]))
          kmax = std::max(kmax, k[1]);
        else
          edge = true;
      } catch (const std::exception&) {
        edge = true;
      }
    }
    std::printf("curvatures    min %s, max %s%s\n", cap::format_sig12(kmin).c_str(),
                cap::format_sig12(kmax).c_str(), edge ? " (edges present)" : "");
    double lam = lambda > 0.0 ? lambda : kmin;
    cap::LambdaReport lr = cap::lambda_convexity_check(body, lam);
    std::printf("lambda-check  lambda = %s: %s (worst margin %s over %d samples)\n",
                cap::format_sig12(lam).c_str(), lr.holds ? "holds" : "fails",
                cap::format_sig12(lr.worst_margin).c_str(), lr.samples_checked);
  } catch (const std::exception& e) {
    std::cerr << "cap body: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"capacity bounds for convex bodies and warped product models"};
  app.require_subcommand(1);

  std::string run_path, suite_dir, radial_path, body_path, dump_base;
  Overrides run_ov, suite_ov;
  double t0 = -1.0, t1 = std::numeric_limits<double>::infinity();
  int curvature_samples = 512;
  int body_resolution = 128;
  double body_lambda = 0.0;
  bool body_info = false;

  CLI::App* run = app.add_subcommand("run", "run one scenario file");
  run->add_option("scenario", run_path, "scenario file (.scn)")->required();
  add_override_flags(run, run_ov);
  run->add_option("--dump-potential", dump_base,
                  "also solve once and export the potential to <base>.hdr/.bin");

  CLI::App* suite = app.add_subcommand("suite", "run every *.scn in a directory");
  suite->add_option("dir", suite_dir, "scenario directory")->required();
  add_override_flags(suite, suite_ov);

  CLI::App* radial = app.add_subcommand("radial", "closed-form/quadrature radial capacity");
  radial->add_option("model", radial_path, "model descriptor file")->required();
  radial->add_option("--t0", t0, "inner geodesic radius");
  radial->add_option("--t1", t1, "outer geodesic radius (default: infinity)");
  radial->add_option("--curvature-samples", curvature_samples, "certificate sample count");

  CLI::App* body = app.add_subcommand("body", "geometric summary of a body descriptor");
  body->add_option("body", body_path, "body descriptor file")->required();
  body->add_flag("--info", body_info, "print area/volume/curvatures/lambda check");
  body->add_option("--resolution", body_resolution, "surface mesh resolution");
  body->add_option("--lambda", body_lambda, "lambda for the convexity check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (run->parsed()) return cmd_run(run_path, run_ov, dump_base);
  if (suite->parsed()) return cmd_suite(suite_dir, suite_ov);
  if (radial->parsed()) return cmd_radial(radial_path, t0, t1, curvature_samples);
  if (body->parsed()) return cmd_body(body_path, body_resolution, body_lambda);
  return 2;
}

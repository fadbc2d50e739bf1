// Command-line front end: field validation, single-point conjugate-time
// solves, sphere scans, left/right equivalence runs, and the built-in
// example suite.  Exit codes: 0 success, 1 failed validation or check,
// 2 input error.
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "wkbconj/builtin_checks.hpp"
#include "wkbconj/field_io.hpp"
#include "wkbconj/flow.hpp"
#include "wkbconj/io.hpp"
#include "wkbconj/right_form.hpp"
#include "wkbconj/scan.hpp"
#include "wkbconj/synthetic.hpp"

namespace {

using namespace wkbconj;

struct CommonArgs {
  std::string field_file;
  std::string points_arg;
  std::string out_dir;
  double horizon = 0.0;  // 0 = take from config / default
  double rtol = 0.0;
  double atol = 0.0;
  int grid_level = 0;
  int threads = 0;
  bool first_only = false;
};

std::vector<Vec3> parse_points(const std::string& arg) {
  std::vector<Vec3> pts;
  std::stringstream ss(arg);
  std::string chunk;
  while (std::getline(ss, chunk, ';')) {
    if (chunk.empty()) continue;
    Vec3 p;
    char comma;
    std::stringstream cs(chunk);
    if (!(cs >> p[0] >> comma >> p[1] >> comma >> p[2]))
      throw ConfigError("cannot parse point '" + chunk + "' (expected x1,x2,x3)");
    pts.push_back(p);
  }
  return pts;
}

struct Resolved {
  LoadedConfig cfg;
  std::vector<Vec3> points;
  double horizon = 50.0;
  OdeOptions ode;
  int grid_level = 4;
  bool first_only = false;
  std::string out_dir;
};

Resolved resolve(const CommonArgs& args, bool need_points) {
  Resolved r;
  r.cfg = load_field_file(args.field_file);
  if (r.cfg.run) {
    r.points = r.cfg.run->points;
    r.horizon = r.cfg.run->horizon;
    r.ode.rtol = r.cfg.run->rtol;
    r.ode.atol = r.cfg.run->atol;
    r.grid_level = r.cfg.run->grid_level;
    r.first_only = r.cfg.run->first_only;
    r.out_dir = r.cfg.run->out_dir;
  }
  if (!args.points_arg.empty()) r.points = parse_points(args.points_arg);
  if (args.horizon > 0.0) r.horizon = args.horizon;
  if (args.rtol > 0.0) r.ode.rtol = args.rtol;
  if (args.atol > 0.0) r.ode.atol = args.atol;
  if (args.grid_level > 0) r.grid_level = args.grid_level;
  if (args.first_only) r.first_only = true;
  if (!args.out_dir.empty()) r.out_dir = args.out_dir;
  if (r.out_dir.empty()) r.out_dir = ".";
  if (need_points && r.points.empty())
    throw ConfigError("no points given (use --points or a run.points section)");
  for (const Vec3& p : r.points) {
    if (!r.cfg.field.chart.contains(p))
      throw ConfigError("point outside the chart box");
  }
  if (!(r.horizon > 0.0)) throw ConfigError("horizon must be positive");
  return r;
}

std::string out_path(const Resolved& r, const std::string& file) {
  std::filesystem::create_directories(r.out_dir);
  return (std::filesystem::path(r.out_dir) / file).string();
}

int cmd_validate(const CommonArgs& args, int samples) {
  const Resolved r = resolve(args, false);
  const FieldConfig& fc = r.cfg.field;

  std::mt19937 rng(2024);
  std::vector<Vec3> pts(samples);
  for (auto& p : pts) p = fc.chart.sample(rng, 0.02);

  bool all_pass = true;
  auto report = [&](const std::string& name, double value, double tol, bool pass) {
    std::cout << name << ": " << format_sci(value) << " (tol " << format_sci(tol) << ") "
              << (pass ? "PASS" : "FAIL") << "\n";
    all_pass = all_pass && pass;
  };

  bool spd_ok = true;
  double frame_dev = 0.0;
  for (const Vec3& p : pts) {
    const Mat3 g = fc.metric.at(p);
    if (!is_spd(g)) {
      spd_ok = false;
      continue;
    }
    const Mat3 e = orthonormal_frame(fc.metric, p);
    frame_dev = std::max(frame_dev,
                         (e.transpose() * g * e - Mat3::Identity()).cwiseAbs().maxCoeff());
  }
  std::cout << "metric SPD over " << samples << " samples: " << (spd_ok ? "PASS" : "FAIL")
            << "\n";
  all_pass = all_pass && spd_ok;
  report("frame orthonormality deviation", frame_dev, 1e-10, frame_dev < 1e-10);

  double div_max = 0.0;
  for (const Vec3& p : pts)
    div_max = std::max(div_max, std::abs(divergence(fc.velocity, fc.metric, p)));
  report("divergence residual", div_max, 1e-8, div_max < 1e-8);

  if (fc.velocity.steady()) {
    const double steady = steadiness_residual(fc.velocity, fc.metric, pts);
    report("steadiness residual |[u, curl u]|", steady, 1e-8, steady < 1e-8);
  } else {
    std::cout << "steadiness residual: n/a (field not declared steady)\n";
  }

  std::cout << (all_pass ? "validation OK" : "validation FAILED") << "\n";
  return all_pass ? 0 : 1;
}

int cmd_first(const CommonArgs& args, const std::string& traj_times) {
  const Resolved r = resolve(args, true);
  const FieldConfig& fc = r.cfg.field;

  std::vector<FirstRow> rows;
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    const Vec3& x = r.points[i];
    FirstRow row;
    row.x = x;
    try {
      const LambdaSource src = LambdaSource::from_field(fc.velocity, fc.metric, fc.chart, x);
      if (const auto ev = first_conjugate_time_full(src, r.horizon, r.ode)) {
        row.ok = true;
        row.t = ev->t;
        row.kernel = ev->kernel3;
      }
    } catch (const std::exception& e) {
      row.failed = true;
      std::cerr << "point " << i << ": " << e.what() << "\n";
    }
    rows.push_back(row);

    std::cout << "point (" << x[0] << ", " << x[1] << ", " << x[2] << "): ";
    if (row.ok) {
      std::cout << "first conjugate time " << format_sci(row.t) << ", kernel ["
                << format_sci(row.kernel[0]) << ", " << format_sci(row.kernel[1]) << ", "
                << format_sci(row.kernel[2]) << "]\n";
    } else {
      std::cout << (row.failed ? "failed" : "none on horizon") << "\n";
    }

    if (!traj_times.empty() && !row.failed) {
      std::vector<double> ts;
      std::stringstream ss(traj_times);
      std::string tok;
      while (std::getline(ss, tok, ',')) ts.push_back(std::stod(tok));
      const FlowSolution flow =
          advance_flow(fc.velocity, fc.metric, fc.chart, x, r.horizon, r.ode);
      atomic_write_file(out_path(r, "traj_p" + std::to_string(i) + ".csv"),
                        trajectory_csv(flow, ts));
    }
  }
  atomic_write_file(out_path(r, "first.csv"), first_csv(rows));
  return 0;
}

int cmd_scan(const CommonArgs& args, bool no_directions) {
  const Resolved r = resolve(args, true);
  const FieldConfig& fc = r.cfg.field;

  ScanOptions sopts;
  sopts.grid_level = r.grid_level;
  sopts.horizon = r.horizon;
  sopts.ode = r.ode;
  sopts.first_only = r.first_only;
  sopts.threads = args.threads;

  for (std::size_t i = 0; i < r.points.size(); ++i) {
    const Vec3& x = r.points[i];
    try {
      const LambdaSource src = LambdaSource::from_field(fc.velocity, fc.metric, fc.chart, x);
      const ScanResult scan = scan_sphere(src, sopts);
      const IntervalSet set = assemble_intervals(scan);

      const std::string stem = "scan_p" + std::to_string(i);
      atomic_write_file(out_path(r, stem + "_surface.csv"), surface_csv(scan));
      atomic_write_file(out_path(r, stem + "_intervals.json"),
                        intervals_json(x, r.horizon, set));
      if (!no_directions)
        atomic_write_file(out_path(r, stem + "_directions.json"), directions_json(x, scan));

      std::cout << "point (" << x[0] << ", " << x[1] << ", " << x[2] << "): "
                << scan.n_branches << " branch(es), intervals:";
      if (set.intervals.empty()) std::cout << " (none)";
      for (const auto& iv : set.intervals)
        std::cout << " [" << format_sci(iv.lo) << ", " << format_sci(iv.hi) << "]";
      if (set.reaches_horizon) std::cout << " (reaches horizon)";
      std::cout << "\n";
    } catch (const std::exception& e) {
      std::cerr << "point " << i << ": " << e.what() << "\n";
    }
  }
  return 0;
}

int cmd_right_check(const CommonArgs& args, int n_pairs, unsigned seed, double tol) {
  const Resolved r = resolve(args, true);
  const FieldConfig& fc = r.cfg.field;
  const double t_max = std::min(r.horizon, 10.0);

  std::mt19937 rng(seed);
  bool all_ok = true;
  for (const Vec3& x : r.points) {
    const Mat3 g0 = fc.metric.at(x);
    double worst = 0.0;
    for (int i = 0; i < n_pairs; ++i) {
      RightFormProblem prob;
      prob.u = fc.velocity;
      prob.g = fc.metric;
      prob.chart = fc.chart;
      prob.x0 = x;
      prob.grad_phi0 = random_unit(rng);
      prob.grad_phi0 /= fc.metric.norm(x, prob.grad_phi0);
      Vec3 a0 = random_unit(rng);
      a0 -= a0.dot(g0 * prob.grad_phi0) / prob.grad_phi0.dot(g0 * prob.grad_phi0) *
            prob.grad_phi0;
      prob.alpha0 = a0 / fc.metric.norm(x, a0);
      worst = std::max(worst, left_right_max_deviation(prob, t_max, 400, r.ode));
    }
    const bool ok = worst < tol;
    all_ok = all_ok && ok;
    std::cout << "point (" << x[0] << ", " << x[1] << ", " << x[2]
              << "): max ||alpha - Deta beta||_g = " << format_sci(worst) << " over "
              << n_pairs << " runs on [0, " << t_max << "] " << (ok ? "PASS" : "FAIL")
              << "\n";
  }
  return all_ok ? 0 : 1;
}

int cmd_examples(double rtol, double atol, int threads, const std::string& emit_dir) {
  if (!emit_dir.empty()) {
    std::filesystem::create_directories(emit_dir);
    const std::pair<const char*, std::string> files[] = {
        {"annulus.json", builtin_annulus_json()},
        {"killing.json", builtin_killing_json()},
        {"shear.json", builtin_shear_json()}};
    for (const auto& [name, text] : files)
      atomic_write_file((std::filesystem::path(emit_dir) / name).string(), text);
    std::cout << "wrote example configs to " << emit_dir << "\n";
  }

  CheckOptions copts;
  copts.threads = threads;
  if (rtol > 0.0 || atol > 0.0) {
    OdeOptions ode;
    if (rtol > 0.0) ode.rtol = rtol;
    if (atol > 0.0) ode.atol = atol;
    copts.ode_override = ode;
  }

  const auto results = run_builtin_checks(copts);
  bool all_pass = true;
  for (const auto& res : results) {
    std::cout << (res.pass ? "[PASS] " : "[FAIL] ") << res.id << " " << res.name << ": "
              << res.detail;
    std::cout << " (" << res.seconds << " s";
    if (res.budget_seconds > 0.0) std::cout << ", budget " << res.budget_seconds << " s";
    std::cout << ")\n";
    all_pass = all_pass && res.pass;
  }
  std::cout << (all_pass ? "all checks passed" : "some checks FAILED") << "\n";
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conjugate-point locator for volume-preserving flows"};
  app.require_subcommand(1);

  CommonArgs args;
  int validate_samples = 200;
  std::string traj_times;
  bool no_directions = false;
  int rc_pairs = 20;
  unsigned rc_seed = 7;
  double rc_tol = 1e-6;
  double ex_rtol = 0.0, ex_atol = 0.0;
  std::string emit_dir;

  auto add_common = [&](CLI::App* cmd, bool with_grid) {
    cmd->add_option("--field", args.field_file, "field definition file (JSON)")->required();
    cmd->add_option("--points", args.points_arg, "points as x1,x2,x3;x1,x2,x3;...");
    cmd->add_option("--horizon", args.horizon, "time horizon");
    cmd->add_option("--rtol", args.rtol, "integrator relative tolerance");
    cmd->add_option("--atol", args.atol, "integrator absolute tolerance");
    cmd->add_option("--out", args.out_dir, "output directory");
    if (with_grid) {
      cmd->add_option("--grid-level", args.grid_level, "icosphere subdivision level");
      cmd->add_flag("--first-only", args.first_only, "report only the first time per direction");
      cmd->add_option("--threads", args.threads, "scan worker threads (0 = hardware)");
    }
  };

  CLI::App* validate = app.add_subcommand("validate", "check a field file");
  validate->add_option("--field", args.field_file, "field definition file (JSON)")->required();
  validate->add_option("--samples", validate_samples, "number of sample points");

  CLI::App* first = app.add_subcommand("first", "first conjugate time of the full operator");
  add_common(first, false);
  first->add_option("--traj-times", traj_times, "also dump trajectory CSV at these times");

  CLI::App* scan = app.add_subcommand("scan", "sphere scan and interval assembly");
  add_common(scan, true);
  scan->add_flag("--no-directions", no_directions, "skip the per-direction JSON dump");

  CLI::App* right = app.add_subcommand("right-check", "left/right amplitude equivalence");
  add_common(right, false);
  right->add_option("--n", rc_pairs, "random initial-data pairs per point");
  right->add_option("--seed", rc_seed, "random seed");
  right->add_option("--tol", rc_tol, "acceptance tolerance");

  CLI::App* examples = app.add_subcommand("examples", "run the built-in check suite");
  examples->add_option("--rtol", ex_rtol, "override integrator relative tolerance");
  examples->add_option("--atol", ex_atol, "override integrator absolute tolerance");
  examples->add_option("--threads", args.threads, "scan worker threads");
  examples->add_option("--emit-configs", emit_dir, "write the built-in configs to a directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (validate->parsed()) return cmd_validate(args, validate_samples);
    if (first->parsed()) return cmd_first(args, traj_times);
    if (scan->parsed()) return cmd_scan(args, no_directions);
    if (right->parsed()) return cmd_right_check(args, rc_pairs, rc_seed, rc_tol);
    if (examples->parsed()) return cmd_examples(ex_rtol, ex_atol, args.threads, emit_dir);
  } catch (const ConfigError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

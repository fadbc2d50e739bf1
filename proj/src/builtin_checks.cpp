#include "wkbconj/builtin_checks.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "wkbconj/annulus.hpp"
#include "wkbconj/field_io.hpp"
#include "wkbconj/index_form.hpp"
#include "wkbconj/right_form.hpp"
#include "wkbconj/scan.hpp"
#include "wkbconj/synthetic.hpp"

namespace wkbconj {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

OdeOptions pick(const CheckOptions& opts, double rtol, double atol) {
  if (opts.ode_override) return *opts.ode_override;
  OdeOptions o;
  o.rtol = rtol;
  o.atol = atol;
  return o;
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

// Trivial pullback, constant vorticity: first trace event at 2 pi / |<omega, xi>|.
CheckResult check_trivial_pullback(const CheckOptions& opts) {
  CheckResult res{"C1", "trivial pullback first crossing", "", 0, 1e-6, false, 0, 5.0};
  Timer timer;
  const OdeOptions ode = pick(opts, 1e-11, 1e-13);
  const Vec3 omega = Vec3(0.3, -0.4, 0.85).normalized();
  const LambdaSource src = LambdaSource::identity(omega);

  std::mt19937 rng(101);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    Vec3 xi;
    do {
      xi = random_unit(rng);
    } while (std::abs(omega.dot(xi)) < 0.1);
    const double expected = kTwoPi / std::abs(omega.dot(xi));
    const WSolution w =
        evolve_w(ReducedSystem(src, WkbDirection::from_vector(xi)), 1.05 * expected + 0.5, ode);
    const auto events = wkb_conjugate_times(w, {}, true);
    if (events.empty()) {
      worst = std::numeric_limits<double>::infinity();
      break;
    }
    worst = std::max(worst, std::abs(events.front().t - expected));
  }
  res.seconds = timer.seconds();
  res.measured = worst;
  res.pass = worst < res.threshold && res.seconds < res.budget_seconds;
  std::ostringstream detail;
  detail << "max |t - 2pi/<w,xi>| = " << worst << " over 100 directions";
  res.detail = detail.str();
  return res;
}

// Twisted torus, f = sin: integrated operator vs closed form; first det zero
// at 2 pi on a 3x3 grid of (x, z).
CheckResult check_annulus_operator(const CheckOptions& opts) {
  CheckResult res{"C2", "twisted-torus operator vs closed form", "", 0, 1e-6, false, 0, 30.0};
  Timer timer;
  const OdeOptions ode = pick(opts, 1e-10, 1e-13);
  const LoadedConfig cfg = parse_field_json(builtin_annulus_json());
  const Expression f = Expression::parse("sin(x1)");
  const double t_max = 2.0 * kTwoPi;

  double sup_err = 0.0, det_err = 0.0;
  for (double xv : {0.0, kTwoPi / 3.0, 2.0 * kTwoPi / 3.0}) {
    for (double zv : {1.0, 1.5, 2.0}) {
      const Vec3 x(xv, 0.0, zv);
      const LambdaSource src =
          LambdaSource::from_field(cfg.field.velocity, cfg.field.metric, cfg.field.chart, x);
      const FullOpSolution num = solve_full_operator(src, t_max, ode);
      const AnnulusClosedForm closed(f, xv, zv, t_max);
      for (int i = 0; i <= 240; ++i) {
        const double t = t_max * i / 240.0;
        sup_err = std::max(sup_err, (num.op(t) - closed.op(t)).cwiseAbs().maxCoeff());
      }
      const auto first = full_conjugate_times(num, {}, true);
      if (first.empty()) {
        det_err = std::numeric_limits<double>::infinity();
      } else {
        det_err = std::max(det_err, std::abs(first.front().t - kTwoPi));
      }
    }
  }
  res.seconds = timer.seconds();
  res.measured = sup_err;
  res.pass = sup_err < 1e-6 && det_err < 1e-4 && res.seconds < res.budget_seconds;
  std::ostringstream detail;
  detail << "sup-norm error " << sup_err << " (tol 1e-6), first det zero |t - 2pi| = "
         << det_err << " (tol 1e-4)";
  res.detail = detail.str();
  return res;
}

// det W = 1, W + c J S = id, and trace events == singular times of S on
// random SPD paths.
CheckResult check_structural_invariants(const CheckOptions& opts) {
  CheckResult res{"C3", "structural invariants on random pullback paths", "", 0, 1e-8, false,
                  0, 0.0};
  Timer timer;
  const OdeOptions ode = pick(opts, 1e-11, 1e-14);
  const Mat2 j = rotation_j();

  std::mt19937 rng(103);
  double worst_drift = 0.0, worst_closure = 0.0, worst_match = 0.0;
  for (int run = 0; run < 50; ++run) {
    const SyntheticSystem sys = random_spd_system(rng);
    const WSolution w = evolve_w(ReducedSystem(sys.source, sys.direction), 20.0, ode);

    worst_drift = std::max(worst_drift, det_w_drift(w));
    for (int i = 0; i <= 400; ++i) {
      const double t = 20.0 * i / 400.0;
      const Mat2 closure = w.w(t) + sys.c * j * w.s(t) - Mat2::Identity();
      worst_closure = std::max(worst_closure, closure.norm());
    }

    const auto events = wkb_conjugate_times(w);
    const auto stimes = s_singular_times(w);
    for (const auto& e : events) {
      if (e.t > 19.95) continue;
      double best = std::numeric_limits<double>::infinity();
      for (double ts : stimes) best = std::min(best, std::abs(ts - e.t));
      worst_match = std::max(worst_match, best);
    }
    for (double ts : stimes) {
      if (ts > 19.95) continue;
      double best = std::numeric_limits<double>::infinity();
      for (const auto& e : events) best = std::min(best, std::abs(ts - e.t));
      worst_match = std::max(worst_match, best);
    }
  }
  res.seconds = timer.seconds();
  res.measured = worst_drift;
  res.pass = worst_drift < 1e-8 && worst_closure < 1e-6 && worst_match < 1e-8;
  std::ostringstream detail;
  detail << "det W drift " << worst_drift << " (tol 1e-8), ||W + cJS - id|| " << worst_closure
         << " (tol 1e-6), event/singular mismatch " << worst_match << " (tol 1e-8)";
  res.detail = detail.str();
  return res;
}

// Left/right amplitude equivalence for the torus and the shear.
CheckResult check_left_right(const CheckOptions& opts) {
  CheckResult res{"C4", "left/right amplitude equivalence", "", 0, 1e-6, false, 0, 0.0};
  Timer timer;
  const OdeOptions ode = pick(opts, 1e-10, 1e-13);

  std::mt19937 rng(104);
  double worst = 0.0;
  const LoadedConfig annulus = parse_field_json(builtin_annulus_json());
  const LoadedConfig shear = parse_field_json(builtin_shear_json());
  const std::pair<const LoadedConfig*, Vec3> cases[2] = {
      {&annulus, Vec3(0.9, 0.0, 1.4)}, {&shear, Vec3(0.0, 0.3, 0.1)}};

  for (const auto& [cfg, x0] : cases) {
    const Metric& g = cfg->field.metric;
    const Mat3 g0 = g.at(x0);
    for (int i = 0; i < 10; ++i) {
      RightFormProblem prob;
      prob.u = cfg->field.velocity;
      prob.g = g;
      prob.chart = cfg->field.chart;
      prob.x0 = x0;
      prob.grad_phi0 = random_unit(rng);
      prob.grad_phi0 /= g.norm(x0, prob.grad_phi0);
      Vec3 a0 = random_unit(rng);
      a0 -= a0.dot(g0 * prob.grad_phi0) / prob.grad_phi0.dot(g0 * prob.grad_phi0) *
            prob.grad_phi0;
      prob.alpha0 = a0 / g.norm(x0, a0);
      worst = std::max(worst, left_right_max_deviation(prob, 10.0, 400, ode));
    }
  }
  res.seconds = timer.seconds();
  res.measured = worst;
  res.pass = worst < res.threshold;
  std::ostringstream detail;
  detail << "max ||alpha - Deta beta||_g = " << worst << " over 20 random data on [0,10]";
  res.detail = detail.str();
  return res;
}

// Index-form eigenvalue changes sign across first transversal crossings.
CheckResult check_oscillation(const CheckOptions& opts) {
  CheckResult res{"C5", "index-form sign flip at crossings", "", 0, 0.0, false, 0, 0.0};
  Timer timer;
  const OdeOptions ode = pick(opts, 1e-9, 1e-12);

  std::mt19937 rng(105);
  int collected = 0, failures = 0, attempts = 0;
  double min_margin = std::numeric_limits<double>::infinity();
  while (collected < 20 && attempts < 200) {
    ++attempts;
    const SyntheticSystem sys = random_spd_system(rng);
    WSolution w = evolve_w(ReducedSystem(sys.source, sys.direction), 15.0, ode);
    const auto events = wkb_conjugate_times(w, {}, true);
    if (events.empty() || events.front().mode != EventMode::TraceCrossing) continue;
    const double t0 = events.front().t;
    if (t0 < 0.5 || t0 > 12.0) continue;
    ++collected;

    const LambdaSource src = sys.source;
    const WkbDirection dir = sys.direction;
    auto lt = [src, dir](double t) { return pi_lambda_pi(src.lambda(t), dir); };
    const double below = index_form_lambda(lt, sys.c, 0.95 * t0).lambda;
    const double above = index_form_lambda(lt, sys.c, 1.05 * t0).lambda;
    if (!(below > 0.0) || !(above < 0.0)) ++failures;
    min_margin = std::min({min_margin, below, -above});
  }
  res.seconds = timer.seconds();
  res.measured = failures;
  res.pass = collected == 20 && failures == 0;
  std::ostringstream detail;
  detail << failures << " sign failures over " << collected
         << " first transversal crossings, min margin " << min_margin;
  res.detail = detail.str();
  return res;
}

// Rigid rotation: a single interval [2 pi, horizon] from the level-4 scan.
CheckResult check_killing_interval(const CheckOptions& opts) {
  CheckResult res{"C6", "rigid-rotation epiconjugate interval", "", 0, 1e-3, false, 0, 0.0};
  Timer timer;
  const LoadedConfig cfg = parse_field_json(builtin_killing_json());
  const Vec3 x = cfg.run->points.front();

  ScanOptions sopts;
  sopts.grid_level = 4;
  sopts.horizon = 40.0;
  sopts.ode = pick(opts, 1e-10, 1e-13);
  sopts.threads = opts.threads;
  const LambdaSource src =
      LambdaSource::from_field(cfg.field.velocity, cfg.field.metric, cfg.field.chart, x);
  const ScanResult scan = scan_sphere(src, sopts);
  const IntervalSet set = assemble_intervals(scan);

  res.seconds = timer.seconds();
  res.measured = set.intervals.empty() ? std::numeric_limits<double>::infinity()
                                       : std::abs(set.intervals.front().lo - kTwoPi);
  res.pass = set.intervals.size() == 1 && res.measured < res.threshold && set.reaches_horizon;
  std::ostringstream detail;
  detail << set.intervals.size() << " interval(s), left endpoint error " << res.measured
         << ", reaches horizon = " << (set.reaches_horizon ? "yes" : "no");
  res.detail = detail.str();
  return res;
}

// Positive scalar coefficient paths never produce vanishing solutions.
CheckResult check_two_dim(const CheckOptions&) {
  CheckResult res{"C7", "two-dimensional reduction is conjugate-point free", "", 0, 0.0,
                  false, 0, 0.0};
  Timer timer;
  std::mt19937 rng(107);
  int failures = 0;
  double min_coeff = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 50; ++i) {
    const auto coeff = random_positive_coefficient(rng);
    const TwoDimCertificate cert = two_dim_degeneracy_check(coeff, 20.0);
    if (!cert.no_vanishing) ++failures;
    min_coeff = std::min(min_coeff, cert.min_coefficient);
  }
  res.seconds = timer.seconds();
  res.measured = failures;
  res.pass = failures == 0;
  std::ostringstream detail;
  detail << failures << " failed certificates over 50 paths, min coefficient " << min_coeff;
  res.detail = detail.str();
  return res;
}

// Finite-difference d/dt Tr W against the algebraic -Tr(J Theta W).
CheckResult check_trace_derivative(const CheckOptions& opts) {
  CheckResult res{"C8", "trace-derivative identity", "", 0, 1e-4, false, 0, 0.0};
  Timer timer;
  const OdeOptions ode = pick(opts, 1e-12, 1e-14);

  std::mt19937 rng(108);
  std::uniform_real_distribution<double> ut(0.5, 19.5);
  double worst = 0.0;
  for (int run = 0; run < 25; ++run) {
    const SyntheticSystem sys = random_spd_system(rng);
    const WSolution w = evolve_w(ReducedSystem(sys.source, sys.direction), 20.0, ode);
    const double h = 1e-5;
    for (int i = 0; i < 40; ++i) {
      const double t = ut(rng);
      const double fd = (w.trace_w(t + h) - w.trace_w(t - h)) / (2.0 * h);
      const double exact = w.dtrace_dt(t);
      worst = std::max(worst, std::abs(fd - exact) / std::max(1.0, std::abs(exact)));
    }
  }
  res.seconds = timer.seconds();
  res.measured = worst;
  res.pass = worst < res.threshold;
  std::ostringstream detail;
  detail << "max relative mismatch " << worst << " over 1000 sampled (t, system) points";
  res.detail = detail.str();
  return res;
}

}  // namespace

std::vector<CheckResult> run_builtin_checks(const CheckOptions& opts) {
  using CheckFn = CheckResult (*)(const CheckOptions&);
  const CheckFn checks[] = {check_trivial_pullback, check_annulus_operator,
                            check_structural_invariants, check_left_right,
                            check_oscillation, check_killing_interval,
                            check_two_dim, check_trace_derivative};
  std::vector<CheckResult> out;
  int idx = 0;
  for (CheckFn fn : checks) {
    ++idx;
    try {
      out.push_back(fn(opts));
    } catch (const std::exception& e) {
      CheckResult res;
      res.id = "C" + std::to_string(idx);
      res.name = "check aborted";
      res.detail = e.what();
      res.pass = false;
      out.push_back(res);
    }
  }
  return out;
}

}  // namespace wkbconj

#include "wkbconj/wkb.hpp"

#include <algorithm>
#include <cmath>

namespace wkbconj {

namespace {

using Map3 = Eigen::Map<const Mat3>;
using Map2 = Eigen::Map<const Mat2>;

Mat2 adj2(const Mat2& m) {
  Mat2 a;
  a << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
  return a;
}

Mat3 adj3(const Mat3& m) {
  Mat3 a;
  a.row(0) = m.col(1).cross(m.col(2));
  a.row(1) = m.col(2).cross(m.col(0));
  a.row(2) = m.col(0).cross(m.col(1));
  return a;
}

void check_chart_exit(const DenseSolution& sol, const Chart& chart) {
  for (const auto& s : sol.segments()) {
    const Vec3 eta = sol(s.t1).head<3>();
    if (!chart.contains(eta, 1e-7)) {
      double lo = s.t0, hi = s.t1;
      for (int i = 0; i < 60 && hi - lo > 1e-12 * (1.0 + hi); ++i) {
        const double mid = 0.5 * (lo + hi);
        (chart.contains(Vec3(sol(mid).head<3>()), 1e-7) ? lo : hi) = mid;
      }
      throw TrajectoryLeftChart("trajectory left the chart near t = " + std::to_string(hi), hi);
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// LambdaSource

LambdaSource LambdaSource::identity(const Vec3& omega_frame) {
  LambdaSource s;
  s.closed_ = [](double) { return Mat3::Identity(); };
  s.omega_ = omega_frame;
  return s;
}

LambdaSource LambdaSource::from_function(std::function<Mat3(double)> lambda,
                                         const Vec3& omega_frame) {
  LambdaSource s;
  s.closed_ = std::move(lambda);
  s.omega_ = omega_frame;
  return s;
}

LambdaSource LambdaSource::from_field(const VectorField& u, const Metric& g,
                                      const Chart& chart, const Vec3& x0) {
  auto ctx = std::make_shared<FieldContext>();
  ctx->u = u;
  ctx->g = g;
  ctx->chart = chart;
  ctx->x0 = x0;
  ctx->frame = orthonormal_frame(g, x0);
  ctx->g0 = g.at(x0);
  ctx->omega_frame = frame_components(ctx->frame, ctx->g0, curl(u, g, x0));
  LambdaSource s;
  s.field_ = std::move(ctx);
  s.omega_ = s.field_->omega_frame;
  return s;
}

// ---------------------------------------------------------------------------
// WkbDirection

WkbDirection WkbDirection::from_angles(double theta, double phi) {
  WkbDirection d;
  d.theta = theta;
  d.phi = phi;
  const double st = std::sin(theta), ct = std::cos(theta);
  const double sp = std::sin(phi), cp = std::cos(phi);
  d.xi0 = Vec3(st * cp, st * sp, ct);
  d.xi1 = Vec3(ct * cp, ct * sp, -st);
  d.xi2 = Vec3(-sp, cp, 0.0);
  return d;
}

WkbDirection WkbDirection::from_vector(const Vec3& xi0_unit) {
  const Vec3 xi0 = xi0_unit.normalized();
  const double theta = std::acos(std::clamp(xi0.z(), -1.0, 1.0));
  const double phi = (xi0.x() == 0.0 && xi0.y() == 0.0) ? 0.0 : std::atan2(xi0.y(), xi0.x());
  WkbDirection d = from_angles(theta, phi);
  // Keep the caller's direction exactly; re-orthogonalize the complement.
  d.xi0 = xi0;
  d.xi1 = (d.xi1 - d.xi1.dot(xi0) * xi0).normalized();
  d.xi2 = xi0.cross(d.xi1);
  return d;
}

Mat2 pi_lambda_pi(const Mat3& lambda, const WkbDirection& dir) {
  Mat2 a;
  a(0, 0) = dir.xi1.dot(lambda * dir.xi1);
  a(0, 1) = dir.xi1.dot(lambda * dir.xi2);
  a(1, 0) = a(0, 1);
  a(1, 1) = dir.xi2.dot(lambda * dir.xi2);
  return a;
}

// ---------------------------------------------------------------------------
// ReducedSystem

ReducedSystem::ReducedSystem(const LambdaSource& source, const WkbDirection& dir)
    : src_(source), dir_(dir) {
  c_ = src_.omega().dot(dir.xi0);
  const double scale = std::max(1.0, src_.omega().norm());
  if (std::abs(c_) <= 1e-15 * scale)
    throw DegenerateDirection("<omega0, xi0> = 0: the trace criterion does not apply");
  if (!src_.field_backed()) {
    const Mat2 a0 = wkbconj::pi_lambda_pi(src_.lambda(0.0), dir_);
    if ((a0 - Mat2::Identity()).cwiseAbs().maxCoeff() > 1e-6)
      throw std::invalid_argument("Lambda(0) must be the identity");
  }
}

Mat2 ReducedSystem::pi_lambda_pi(double t) const {
  if (src_.field_backed())
    throw std::logic_error("pi_lambda_pi(t) needs a closed-form Lambda source");
  return wkbconj::pi_lambda_pi(src_.lambda(t), dir_);
}

// ---------------------------------------------------------------------------
// Reduced momentum solve

WSolution evolve_w(const ReducedSystem& sys, double t_max, const OdeOptions& opts) {
  return detail::evolve_momentum(sys.source(), sys.direction(), sys.c(), t_max, opts);
}

WSolution detail::evolve_momentum(const LambdaSource& src, const WkbDirection& dir,
                                  double c_in, double t_max, const OdeOptions& opts) {
  WSolution out;
  out.src_ = src;
  out.dir_ = dir;
  out.c_ = c_in;
  out.field_backed_ = out.src_.field_backed();
  const Mat2 j = rotation_j();
  const double c = out.c_;

  if (out.field_backed_) {
    const FieldContext& fc = out.src_.field();
    Eigen::Matrix<double, 3, 2> m2;
    m2.col(0) = fc.frame * out.dir_.xi1;
    m2.col(1) = fc.frame * out.dir_.xi2;
    out.m2_ = m2;
    out.off_w_ = 12;
    out.off_s_ = 16;

    OdeRhs rhs = [&fc, m2, c, j](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
      const Vec3 eta = y.head<3>();
      const Mat3 deta = Map3(y.data() + 3);
      dy.head<3>() = fc.u.at(t, eta);
      Eigen::Map<Mat3>(dy.data() + 3) = fc.u.jacobian(t, eta) * deta;
      const Eigen::Matrix<double, 3, 2> cc = deta * m2;
      const Mat2 a = cc.transpose() * fc.g.at(eta) * cc;
      const Mat2 ainv_w = a.inverse() * Map2(y.data() + 12);
      Eigen::Map<Mat2>(dy.data() + 12) = -c * j * ainv_w;
      Eigen::Map<Mat2>(dy.data() + 16) = ainv_w;
    };

    Eigen::VectorXd y0 = Eigen::VectorXd::Zero(20);
    y0.head<3>() = fc.x0;
    Eigen::Map<Mat2>(y0.data() + 12) = Mat2::Identity();
    Eigen::Map<Mat3>(y0.data() + 3) = Mat3::Identity();
    out.sol_ = integrate_dense(rhs, y0, 0.0, t_max, opts);
    check_chart_exit(out.sol_, fc.chart);
  } else {
    const LambdaSource src = out.src_;
    const WkbDirection dir = out.dir_;
    out.off_w_ = 0;
    out.off_s_ = 4;

    OdeRhs rhs = [src, dir, c, j](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
      const Mat2 a = pi_lambda_pi(src.lambda(t), dir);
      const Mat2 ainv_w = a.inverse() * Map2(y.data());
      Eigen::Map<Mat2>(dy.data()) = -c * j * ainv_w;
      Eigen::Map<Mat2>(dy.data() + 4) = ainv_w;
    };

    Eigen::VectorXd y0 = Eigen::VectorXd::Zero(8);
    Eigen::Map<Mat2>(y0.data()) = Mat2::Identity();
    out.sol_ = integrate_dense(rhs, y0, 0.0, t_max, opts);
  }
  return out;
}

Mat2 WSolution::w(double t) const {
  const Eigen::VectorXd y = sol_(t);
  return Map2(y.data() + off_w_);
}

Mat2 WSolution::s(double t) const {
  const Eigen::VectorXd y = sol_(t);
  return Map2(y.data() + off_s_);
}

Mat2 WSolution::pi_lambda_pi(double t) const {
  if (!field_backed_) return wkbconj::pi_lambda_pi(src_.lambda(t), dir_);
  const Eigen::VectorXd y = sol_(t);
  const Vec3 eta = y.head<3>();
  const Mat3 deta = Map3(y.data() + 3);
  const Eigen::Matrix<double, 3, 2> cc = deta * m2_;
  return cc.transpose() * src_.field().g.at(eta) * cc;
}

Vec3 WSolution::eta(double t) const {
  if (!field_backed_) throw std::logic_error("eta(t) needs a field-backed solve");
  const Eigen::VectorXd y = sol_(t);
  return y.head<3>();
}

Mat3 WSolution::d_eta(double t) const {
  if (!field_backed_) throw std::logic_error("d_eta(t) needs a field-backed solve");
  const Eigen::VectorXd y = sol_(t);
  return Map3(y.data() + 3);
}

double WSolution::dtrace_dt(double t) const {
  return -c_ * (rotation_j() * pi_lambda_pi(t).inverse() * w(t)).trace();
}

double WSolution::ddet_s_dt(double t) const {
  const Mat2 sdot = pi_lambda_pi(t).inverse() * w(t);
  return (adj2(s(t)) * sdot).trace();
}

// ---------------------------------------------------------------------------
// Full 3x3 operator

FullOpSolution solve_full_operator(const LambdaSource& source, double t_max,
                                   const OdeOptions& opts) {
  FullOpSolution out;
  out.src_ = source;
  out.field_backed_ = source.field_backed();
  const Mat3 omega_x = cross_matrix(source.omega());

  if (out.field_backed_) {
    const FieldContext& fc = source.field();
    out.off_u_ = 12;
    out.off_p_ = 21;

    OdeRhs rhs = [&fc, omega_x](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
      const Vec3 eta = y.head<3>();
      const Mat3 deta = Map3(y.data() + 3);
      dy.head<3>() = fc.u.at(t, eta);
      Eigen::Map<Mat3>(dy.data() + 3) = fc.u.jacobian(t, eta) * deta;
      const Mat3 b = deta * fc.frame;
      const Mat3 lam = b.transpose() * fc.g.at(eta) * b;
      const Mat3 udot = lam.inverse() * Map3(y.data() + 21);
      Eigen::Map<Mat3>(dy.data() + 12) = udot;
      Eigen::Map<Mat3>(dy.data() + 21) = -omega_x * udot;
    };

    Eigen::VectorXd y0 = Eigen::VectorXd::Zero(30);
    y0.head<3>() = fc.x0;
    Eigen::Map<Mat3>(y0.data() + 3) = Mat3::Identity();
    Eigen::Map<Mat3>(y0.data() + 21) = Mat3::Identity();
    out.sol_ = integrate_dense(rhs, y0, 0.0, t_max, opts);
    check_chart_exit(out.sol_, fc.chart);
  } else {
    const LambdaSource src = source;
    out.off_u_ = 0;
    out.off_p_ = 9;

    OdeRhs rhs = [src, omega_x](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
      const Mat3 udot = src.lambda(t).inverse() * Map3(y.data() + 9);
      Eigen::Map<Mat3>(dy.data()) = udot;
      Eigen::Map<Mat3>(dy.data() + 9) = -omega_x * udot;
    };

    Eigen::VectorXd y0 = Eigen::VectorXd::Zero(18);
    Eigen::Map<Mat3>(y0.data() + 9) = Mat3::Identity();
    out.sol_ = integrate_dense(rhs, y0, 0.0, t_max, opts);
  }
  return out;
}

Mat3 FullOpSolution::op(double t) const {
  const Eigen::VectorXd y = sol_(t);
  return Map3(y.data() + off_u_);
}

Mat3 FullOpSolution::momentum(double t) const {
  const Eigen::VectorXd y = sol_(t);
  return Map3(y.data() + off_p_);
}

Mat3 FullOpSolution::lambda(double t) const {
  if (!field_backed_) return src_.lambda(t);
  const Eigen::VectorXd y = sol_(t);
  const Vec3 eta = y.head<3>();
  const Mat3 deta = Map3(y.data() + 3);
  const Mat3 b = deta * src_.field().frame;
  return b.transpose() * src_.field().g.at(eta) * b;
}

Mat3 FullOpSolution::op_dot(double t) const { return lambda(t).inverse() * momentum(t); }

double FullOpSolution::ddet_dt(double t) const {
  return (adj3(op(t)) * op_dot(t)).trace();
}

Mat3 FullOpSolution::conservation_residual(double t) const {
  return momentum(t) + cross_matrix(src_.omega()) * op(t) - Mat3::Identity();
}

// ---------------------------------------------------------------------------
// Event detection

const char* to_string(EventMode mode) {
  switch (mode) {
    case EventMode::DetZero3D: return "det_zero_3d";
    case EventMode::TraceCrossing: return "trace_crossing";
    case EventMode::TangentialContact: return "tangential_contact";
  }
  return "?";
}

namespace {

struct RawEvent {
  double t;
  bool from_extremum;
};

double bisect(const std::function<double(double)>& f, double a, double b, double fa,
              double time_tol) {
  for (int i = 0; i < 200 && b - a > time_tol; ++i) {
    const double mid = 0.5 * (a + b);
    const double fm = f(mid);
    if ((fa <= 0.0) == (fm <= 0.0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

// Bracket sign changes of g (transversal events) and of g' (candidate
// tangential events, accepted when |g| is small there).  Events before g has
// ever departed from zero are discarded: every solution starts at a trivial
// double zero at t = 0.
std::vector<RawEvent> scan_events(const std::function<double(double)>& g,
                                  const std::function<double(double)>& gdot,
                                  double t_max, const EventTolerances& tol,
                                  bool first_only) {
  const double dt_target = std::min(tol.sample_dt_cap, t_max / tol.min_samples);
  const long n = std::max(2L, std::lround(std::ceil(t_max / dt_target)));
  std::vector<double> ts(n + 1), gs(n + 1), gds(n + 1);
  for (long i = 0; i <= n; ++i) {
    ts[i] = t_max * static_cast<double>(i) / static_cast<double>(n);
    gs[i] = g(ts[i]);
    gds[i] = gdot(ts[i]);
  }

  const double depart = 10.0 * tol.tangent_value_tol;
  long start = -1;
  for (long i = 0; i <= n; ++i) {
    if (std::abs(gs[i]) > depart) {
      start = i;
      break;
    }
  }
  if (start < 0) return {};

  auto accept_tol = [&](double t_star) {
    if (tol.tangent_scale_window <= 0.0) return tol.tangent_value_tol;
    double scale = 1.0;
    const long w = std::lround(tol.tangent_scale_window / (t_max / n)) + 1;
    const long c = std::lround(t_star / (t_max / n));
    for (long i = std::max(0L, c - w); i <= std::min(n, c + w); ++i)
      scale = std::max(scale, std::abs(gs[i]));
    return tol.tangent_value_tol * scale;
  };

  std::vector<RawEvent> events;
  for (long i = std::max(0L, start - 1); i < n; ++i) {
    const double a = ts[i], b = ts[i + 1];
    if (gs[i] * gs[i + 1] < 0.0 && i >= start) {
      events.push_back({bisect(g, a, b, gs[i], tol.time_tol), false});
    } else if (gds[i] * gds[i + 1] < 0.0) {
      const double t_star = bisect(gdot, a, b, gds[i], tol.time_tol);
      if (t_star > ts[start] && std::abs(g(t_star)) < accept_tol(t_star))
        events.push_back({t_star, true});
    }
    if (first_only && !events.empty()) break;
  }

  std::sort(events.begin(), events.end(),
            [](const RawEvent& x, const RawEvent& y) { return x.t < y.t; });
  std::vector<RawEvent> out;
  const double merge_tol = std::max(100.0 * tol.time_tol, 1e-9);
  for (const RawEvent& e : events) {
    if (!out.empty() && e.t - out.back().t < merge_tol) {
      if (out.back().from_extremum && !e.from_extremum) out.back() = e;
      continue;
    }
    out.push_back(e);
  }
  if (first_only && out.size() > 1) out.resize(1);
  return out;
}

Vec2 kernel_of_2x2(const Mat2& m) {
  Eigen::JacobiSVD<Mat2> svd(m, Eigen::ComputeFullV);
  return svd.matrixV().col(1);
}

Vec3 kernel_of_3x3(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullV);
  return svd.matrixV().col(2);
}

}  // namespace

std::vector<ConjugateEvent> wkb_conjugate_times(const WSolution& w,
                                                const EventTolerances& tol,
                                                bool first_only) {
  auto g = [&](double t) { return w.trace_w(t) - 2.0; };
  auto gdot = [&](double t) { return w.dtrace_dt(t); };
  const auto raw = scan_events(g, gdot, w.t_end(), tol, first_only);

  std::vector<ConjugateEvent> events;
  events.reserve(raw.size());
  for (const RawEvent& r : raw) {
    ConjugateEvent e;
    e.t = r.t;
    const Mat2 wm = w.w(r.t);
    const bool is_id = (wm - Mat2::Identity()).norm() < tol.tangent_norm_tol;
    e.mode = is_id ? EventMode::TangentialContact : EventMode::TraceCrossing;
    e.kernel2 = kernel_of_2x2(wm - Mat2::Identity());
    e.direction = w.direction();
    events.push_back(e);
  }
  return events;
}

double det_w_drift(const WSolution& w, const EventTolerances& tol) {
  const double t_max = w.t_end();
  const double dt_target = std::min(tol.sample_dt_cap, t_max / tol.min_samples);
  const long n = std::max(2L, std::lround(std::ceil(t_max / dt_target)));
  double worst = 0.0;
  for (long i = 0; i <= n; ++i) {
    const double t = t_max * static_cast<double>(i) / static_cast<double>(n);
    worst = std::max(worst, std::abs(w.det_w(t) - 1.0));
  }
  return worst;
}

std::vector<double> s_singular_times(const WSolution& w, const EventTolerances& tol) {
  auto g = [&](double t) { return w.det_s(t); };
  auto gdot = [&](double t) { return w.ddet_s_dt(t); };
  EventTolerances tl = tol;
  if (tl.tangent_scale_window <= 0.0) tl.tangent_scale_window = 1.0;
  const auto raw = scan_events(g, gdot, w.t_end(), tl, false);
  std::vector<double> out;
  out.reserve(raw.size());
  for (const RawEvent& r : raw) out.push_back(r.t);
  return out;
}

std::vector<ConjugateEvent> full_conjugate_times(const FullOpSolution& u,
                                                 const EventTolerances& tol,
                                                 bool first_only) {
  auto g = [&](double t) { return u.det_op(t); };
  auto gdot = [&](double t) { return u.ddet_dt(t); };
  EventTolerances tl = tol;
  if (tl.tangent_scale_window <= 0.0) {
    // det grows with t; accept touching zeros relative to the local magnitude.
    tl.tangent_scale_window = 1.0;
    tl.tangent_value_tol = std::max(tl.tangent_value_tol, 1e-6);
  }
  const auto raw = scan_events(g, gdot, u.t_end(), tl, first_only);

  std::vector<ConjugateEvent> events;
  events.reserve(raw.size());
  for (const RawEvent& r : raw) {
    ConjugateEvent e;
    e.t = r.t;
    e.mode = EventMode::DetZero3D;
    e.kernel3 = kernel_of_3x3(u.op(r.t));
    events.push_back(e);
  }
  return events;
}

std::optional<ConjugateEvent> first_conjugate_time_full(const LambdaSource& source,
                                                        double t_max,
                                                        const OdeOptions& opts,
                                                        const EventTolerances& tol) {
  const FullOpSolution u = solve_full_operator(source, t_max, opts);
  auto events = full_conjugate_times(u, tol, true);
  if (events.empty()) return std::nullopt;
  return events.front();
}

// ---------------------------------------------------------------------------

TwoDimCertificate two_dim_degeneracy_check(const std::function<double(double)>& coeff,
                                           double t_max, int samples) {
  if (samples % 2 != 0) ++samples;
  TwoDimCertificate cert;
  cert.min_coefficient = std::numeric_limits<double>::infinity();
  const double h = t_max / samples;
  double integral = 0.0;
  for (int i = 0; i <= samples; ++i) {
    const double a = coeff(i * h);
    cert.min_coefficient = std::min(cert.min_coefficient, a);
    const double wgt = (i == 0 || i == samples) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    integral += wgt / a;
  }
  cert.monotone_increment = integral * h / 3.0;
  cert.no_vanishing = cert.min_coefficient > 0.0;
  return cert;
}

}  // namespace wkbconj

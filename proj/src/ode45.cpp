#include "wkbconj/ode45.hpp"

#include <algorithm>
#include <cmath>

namespace wkbconj {

namespace {

// Dormand-Prince RK5(4)7M tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// Difference between the 5th- and 4th-order weights.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Dense-output weights for the quartic interpolant.
constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;

double scaled_rms(const Eigen::VectorXd& v, const Eigen::VectorXd& scale) {
  const double n = static_cast<double>(v.size());
  return std::sqrt((v.cwiseQuotient(scale)).squaredNorm() / n);
}

double initial_step_guess(const OdeRhs& f, double t0, const Eigen::VectorXd& y0,
                          const Eigen::VectorXd& f0, double rtol, double atol,
                          double span) {
  const Eigen::VectorXd scale = (atol + rtol * y0.cwiseAbs().array()).matrix();
  const double dy = scaled_rms(y0, scale);
  const double df = scaled_rms(f0, scale);
  double h0 = (dy < 1e-5 || df < 1e-5) ? 1e-6 : 0.01 * dy / df;
  h0 = std::min(h0, 0.1 * span);
  Eigen::VectorXd y1 = y0 + h0 * f0;
  Eigen::VectorXd f1(y0.size());
  f(t0 + h0, y1, f1);
  const double d2 = scaled_rms(f1 - f0, scale) / h0;
  const double dmax = std::max(df, d2);
  double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                            : std::pow(0.01 / dmax, 0.2);
  return std::min({100.0 * h0, h1, span});
}

}  // namespace

void DenseSolution::eval(double t, Eigen::VectorXd& out) const {
  if (segments_.empty()) throw std::logic_error("empty dense solution");
  const double pad = 1e-9 * (1.0 + std::abs(t_end_ - t_begin_));
  if (t < t_begin_ - pad || t > t_end_ + pad)
    throw std::out_of_range("dense solution evaluated outside its time range");
  t = std::clamp(t, t_begin_, t_end_);
  // First segment with t1 >= t.
  std::size_t lo = 0, hi = segments_.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (segments_[mid].t1 < t)
      lo = mid + 1;
    else
      hi = mid;
  }
  const Segment& s = segments_[lo];
  const double th = (t - s.t0) / (s.t1 - s.t0);
  const double th1 = 1.0 - th;
  out = s.r1 + th * (s.r2 + th1 * (s.r3 + th * (s.r4 + th1 * s.r5)));
}

DenseSolution integrate_dense(const OdeRhs& f, Eigen::VectorXd y0, double t0, double t1,
                              const OdeOptions& opts) {
  if (!(t1 > t0)) throw std::invalid_argument("integrate_dense requires t1 > t0");
  const auto n = y0.size();
  const double span = t1 - t0;

  Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
  Eigen::VectorXd y = y0, ytmp(n), ynew(n), yerr(n), scale(n);

  DenseSolution sol;
  sol.dim_ = static_cast<int>(n);
  sol.t_begin_ = t0;

  f(t0, y, k1);
  double h = opts.initial_step > 0.0
                 ? opts.initial_step
                 : initial_step_guess(f, t0, y, k1, opts.rtol, opts.atol, span);
  if (opts.max_step > 0.0) h = std::min(h, opts.max_step);

  double t = t0;
  long steps = 0;
  while (t < t1) {
    if (++steps > opts.max_steps) throw StepFailure("integrator exceeded max step count");
    h = std::min(h, t1 - t);
    if (h < 1e-14 * (1.0 + std::abs(t))) throw StepFailure("integrator step size underflow");

    ytmp = y + h * (a21 * k1);
    f(t + c2 * h, ytmp, k2);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    f(t + c3 * h, ytmp, k3);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    f(t + c4 * h, ytmp, k4);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(t + c5 * h, ytmp, k5);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    f(t + h, ytmp, k6);
    ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    f(t + h, ynew, k7);  // FSAL

    yerr = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    scale = (opts.atol + opts.rtol * y.cwiseAbs().cwiseMax(ynew.cwiseAbs()).array()).matrix();
    const double err = scaled_rms(yerr, scale);

    if (err <= 1.0) {
      DenseSolution::Segment seg;
      seg.t0 = t;
      seg.t1 = t + h;
      seg.r1 = y;
      seg.r2 = ynew - y;
      seg.r3 = h * k1 - seg.r2;
      seg.r4 = seg.r2 - h * k7 - seg.r3;
      seg.r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      sol.segments_.push_back(std::move(seg));

      t += h;
      y.swap(ynew);
      k1.swap(k7);
      const double fac =
          err == 0.0 ? 10.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 10.0);
      h *= fac;
    } else {
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
    }
    if (opts.max_step > 0.0) h = std::min(h, opts.max_step);
  }
  sol.t_end_ = t;
  return sol;
}

}  // namespace wkbconj

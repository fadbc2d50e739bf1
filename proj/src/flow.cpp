#include "wkbconj/flow.hpp"

#include <cmath>

namespace wkbconj {

namespace {

using Map3 = Eigen::Map<const Mat3>;

}  // namespace

Vec3 FlowSolution::eta_unwrapped(double t) const {
  Eigen::VectorXd y = sol_(t);
  return y.head<3>();
}

Mat3 FlowSolution::d_eta(double t) const {
  Eigen::VectorXd y = sol_(t);
  return Map3(y.data() + 3);
}

Mat3 FlowSolution::lambda_frame(double t) const {
  Eigen::VectorXd y = sol_(t);
  const Vec3 eta = y.head<3>();
  const Mat3 deta = Map3(y.data() + 3);
  const Mat3 b = deta * frame_;
  return b.transpose() * g_.at(eta) * b;
}

double FlowSolution::volume_residual(double t) const {
  Eigen::VectorXd y = sol_(t);
  const Vec3 eta = y.head<3>();
  const Mat3 deta = Map3(y.data() + 3);
  return deta.determinant() * g_.sqrt_det(eta) / sqrt_g0_ - 1.0;
}

FlowSolution advance_flow(const VectorField& u, const Metric& g, const Chart& chart,
                          const Vec3& x0, double t_end, const OdeOptions& opts) {
  if (!chart.contains(x0))
    throw TrajectoryLeftChart("flow base point lies outside the chart", 0.0);

  FlowSolution out;
  out.g_ = g;
  out.chart_ = chart;
  out.x0_ = x0;
  out.frame_ = orthonormal_frame(g, x0);
  out.sqrt_g0_ = g.sqrt_det(x0);
  const Vec3 omega0 = curl(u, g, x0);
  out.omega_frame_ = frame_components(out.frame_, g.at(x0), omega0);

  OdeRhs rhs = [&u](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    const Vec3 eta = y.head<3>();
    const Mat3 deta = Map3(y.data() + 3);
    dy.head<3>() = u.at(t, eta);
    Eigen::Map<Mat3>(dy.data() + 3) = u.jacobian(t, eta) * deta;
  };

  Eigen::VectorXd y0(12);
  y0.head<3>() = x0;
  Eigen::Map<Mat3>(y0.data() + 3) = Mat3::Identity();
  out.sol_ = integrate_dense(rhs, y0, 0.0, t_end, opts);

  // Non-periodic exit check; bisects the first offending segment endpoint.
  const auto& segs = out.sol_.segments();
  for (const auto& s : segs) {
    const Vec3 eta1 = out.sol_(s.t1).head<3>();
    if (!chart.contains(eta1, 1e-7)) {
      double lo = s.t0, hi = s.t1;
      for (int i = 0; i < 60 && hi - lo > 1e-12 * (1.0 + hi); ++i) {
        const double mid = 0.5 * (lo + hi);
        (chart.contains(Vec3(out.sol_(mid).head<3>()), 1e-7) ? lo : hi) = mid;
      }
      throw TrajectoryLeftChart("trajectory left the chart near t = " + std::to_string(hi), hi);
    }
  }
  return out;
}

PullbackPath metric_pullback(const FlowSolution& flow, const std::vector<double>& times) {
  PullbackPath path;
  path.times = times;
  path.omega_frame = flow.omega_frame();
  path.lambda.reserve(times.size());
  for (double t : times) {
    Mat3 lam = flow.lambda_frame(t);
    lam = 0.5 * (lam + lam.transpose());
    if (!is_spd(lam, 1e-9))
      throw NonSpdMetric("pullback lost positive-definiteness; integrator tolerance too loose");
    path.lambda.push_back(lam);
  }
  return path;
}

}  // namespace wkbconj

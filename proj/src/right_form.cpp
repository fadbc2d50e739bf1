#include "wkbconj/right_form.hpp"

#include <cmath>

namespace wkbconj {

namespace {

using Map3 = Eigen::Map<const Mat3>;

// grad Phi(t) = g(eta)^{-1} Deta^{-T} g(x0) grad Phi_0.
Vec3 grad_phi_at(const Metric& g, const Mat3& g0, const Vec3& grad_phi0, const Vec3& eta,
                 const Mat3& deta) {
  const Vec3 cov0 = g0 * grad_phi0;
  const Vec3 cov = deta.transpose().inverse() * cov0;
  return g.at(eta).inverse() * cov;
}

Vec3 covariant_dir(const std::array<Mat3, 3>& christ, const Vec3& a, const Vec3& b) {
  Vec3 out;
  for (int k = 0; k < 3; ++k) out[k] = a.dot(christ[k] * b);
  return out;
}

}  // namespace

RightFormSolution solve_right_form(const RightFormProblem& prob, double t_max,
                                   const OdeOptions& opts) {
  const Mat3 g0 = prob.g.at(prob.x0);
  if (prob.grad_phi0.dot(g0 * prob.grad_phi0) < 1e-24)
    throw GradientVanished("grad Phi_0 vanishes at the base point");
  if (std::abs(prob.alpha0.dot(g0 * prob.grad_phi0)) >
      1e-8 * prob.g.norm(prob.x0, prob.alpha0) * prob.g.norm(prob.x0, prob.grad_phi0))
    throw std::invalid_argument("alpha0 must be g-orthogonal to grad Phi_0");

  RightFormSolution out;
  out.prob_ = prob;
  out.g0_ = g0;

  const VectorField& u = prob.u;
  const Metric& g = prob.g;
  const Vec3 gp0 = prob.grad_phi0;

  OdeRhs rhs = [&u, &g, g0, gp0](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    const Vec3 eta = y.head<3>();
    const Mat3 deta = Map3(y.data() + 3);
    const Vec3 alpha = y.segment<3>(12);

    const Vec3 uv = u.at(t, eta);
    const Mat3 ju = u.jacobian(t, eta);
    dy.head<3>() = uv;
    Eigen::Map<Mat3>(dy.data() + 3) = ju * deta;

    const Mat3 geta = g.at(eta);
    const Vec3 gp = grad_phi_at(g, g0, gp0, eta, deta);
    const double gp2 = gp.dot(geta * gp);
    if (gp2 < 1e-24) throw GradientVanished("grad Phi vanished along the trajectory");

    const auto christ = g.christoffel(eta);
    const Vec3 nabla_alpha_u = ju * alpha + covariant_dir(christ, uv, alpha);
    const double q = nabla_alpha_u.dot(geta * gp) / gp2;
    dy.segment<3>(12) = -covariant_dir(christ, uv, alpha) - nabla_alpha_u + 2.0 * q * gp;
  };

  Eigen::VectorXd y0 = Eigen::VectorXd::Zero(15);
  y0.head<3>() = prob.x0;
  Eigen::Map<Mat3>(y0.data() + 3) = Mat3::Identity();
  y0.segment<3>(12) = prob.alpha0;
  out.sol_ = integrate_dense(rhs, y0, 0.0, t_max, opts);

  for (const auto& s : out.sol_.segments()) {
    if (!prob.chart.contains(Vec3(out.sol_(s.t1).head<3>()), 1e-7))
      throw TrajectoryLeftChart("trajectory left the chart near t = " + std::to_string(s.t1),
                                s.t1);
  }
  return out;
}

Vec3 RightFormSolution::alpha(double t) const {
  const Eigen::VectorXd y = sol_(t);
  return y.segment<3>(12);
}

Vec3 RightFormSolution::eta(double t) const {
  const Eigen::VectorXd y = sol_(t);
  return y.head<3>();
}

Mat3 RightFormSolution::d_eta(double t) const {
  const Eigen::VectorXd y = sol_(t);
  return Map3(y.data() + 3);
}

Vec3 RightFormSolution::grad_phi(double t) const {
  const Eigen::VectorXd y = sol_(t);
  return grad_phi_at(prob_.g, g0_, prob_.grad_phi0, Vec3(y.head<3>()),
                     Mat3(Map3(y.data() + 3)));
}

double RightFormSolution::q(double t) const {
  const Eigen::VectorXd y = sol_(t);
  const Vec3 eta = y.head<3>();
  const Vec3 al = y.segment<3>(12);
  const Mat3 geta = prob_.g.at(eta);
  const Vec3 gp = grad_phi(t);
  const Mat3 ju = prob_.u.jacobian(t, eta);
  const auto christ = prob_.g.christoffel(eta);
  Vec3 nau = ju * al;
  for (int k = 0; k < 3; ++k) nau[k] += prob_.u.at(t, eta).dot(christ[k] * al);
  return nau.dot(geta * gp) / gp.dot(geta * gp);
}

double RightFormSolution::constraint_residual(double t) const {
  const Vec3 al = alpha(t);
  return al.dot(prob_.g.at(eta(t)) * grad_phi(t));
}

LeftFormSolution solve_left_form(const RightFormProblem& prob, double t_max,
                                 const OdeOptions& opts) {
  const Mat3 g0 = prob.g.at(prob.x0);
  const Mat3 frame = orthonormal_frame(prob.g, prob.x0);

  const Vec3 xi_frame = frame_components(frame, g0, prob.grad_phi0).normalized();
  const WkbDirection dir = WkbDirection::from_vector(xi_frame);

  LeftFormSolution out;
  out.frame_ = frame;
  const Vec3 a0_frame = frame_components(frame, g0, prob.alpha0);
  out.b0_ = Vec2(a0_frame.dot(dir.xi1), a0_frame.dot(dir.xi2));

  const LambdaSource src = LambdaSource::from_field(prob.u, prob.g, prob.chart, prob.x0);
  out.w_ = evolve_w(ReducedSystem(src, dir), t_max, opts);
  return out;
}

Vec3 LeftFormSolution::beta(double t) const {
  // m = (pi Lambda pi) b evolves by the fundamental matrix W.
  const Vec2 m = w_.w(t) * b0_;
  const Vec2 b = w_.pi_lambda_pi(t).inverse() * m;
  const WkbDirection& d = w_.direction();
  return frame_ * (b[0] * d.xi1 + b[1] * d.xi2);
}

Vec3 LeftFormSolution::alpha(double t) const { return w_.d_eta(t) * beta(t); }

double left_right_max_deviation(const RightFormProblem& prob, double t_max, int n_samples,
                                const OdeOptions& opts) {
  const RightFormSolution right = solve_right_form(prob, t_max, opts);
  const LeftFormSolution left = solve_left_form(prob, t_max, opts);
  double worst = 0.0;
  for (int i = 0; i <= n_samples; ++i) {
    const double t = t_max * i / n_samples;
    const Vec3 diff = right.alpha(t) - left.alpha(t);
    worst = std::max(worst, prob.g.norm(right.eta(t), diff));
  }
  return worst;
}

}  // namespace wkbconj

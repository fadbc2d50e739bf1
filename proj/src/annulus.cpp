#include "wkbconj/annulus.hpp"

#include <cmath>
#include <numbers>

namespace wkbconj {

ExprMatrix annulus_metric_exprs(const Expression& f) {
  const Expression zero = Expression::constant(0.0);
  const Expression one = Expression::constant(1.0);
  const Expression z = Expression::variable(2);
  ExprMatrix g;
  g[0][0] = z;
  g[0][1] = zero;
  g[0][2] = zero;
  g[1][0] = zero;
  g[1][1] = one;
  g[1][2] = f;
  g[2][0] = zero;
  g[2][1] = f;
  g[2][2] = f * f + one / z;
  return g;
}

ExprVec3 annulus_velocity_exprs() {
  return {Expression::constant(1.0), Expression::constant(0.0), Expression::constant(0.0)};
}

Chart annulus_chart(double z_lo, double z_hi) {
  Chart c;
  const double two_pi = 2.0 * std::numbers::pi;
  c.lo = Vec3(0.0, 0.0, z_lo);
  c.hi = Vec3(two_pi, two_pi, z_hi);
  c.periodic = {true, true, false};
  return c;
}

double annulus_k(const Expression& f, double t, double x, double z) {
  return std::sqrt(z) * (f.eval(x + t, 0.0, 0.0, 0.0) - f.eval(x, 0.0, 0.0, 0.0));
}

Mat3 annulus_lambda(const Expression& f, double t, double x, double z) {
  const double k = annulus_k(f, t, x, z);
  Mat3 lam;
  lam << 1.0, 0.0, 0.0,
         0.0, 1.0, k,
         0.0, k, 1.0 + k * k;
  return lam;
}

AnnulusClosedForm::AnnulusClosedForm(const Expression& f, double x, double z,
                                     double t_max, double rtol)
    : f_(f), x_(x), z_(z) {
  OdeRhs rhs = [this](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    const double k = annulus_k(f_, t, x_, z_);
    const double kc = k * std::cos(t);
    const double ks = k * std::sin(t);
    dy[0] = kc;                      // F
    dy[1] = ks;                      // G
    dy[2] = k * k;                   // I2
    dy[3] = y[1] * kc - y[0] * ks;   // I3 = int (G F' - F G')
  };
  OdeOptions opts;
  opts.rtol = rtol;
  opts.atol = 1e-14;
  quad_ = integrate_dense(rhs, Eigen::Vector4d::Zero(), 0.0, t_max, opts);
}

double AnnulusClosedForm::F(double t) const { return quad_(t)[0]; }
double AnnulusClosedForm::G(double t) const { return quad_(t)[1]; }

Mat3 AnnulusClosedForm::op(double t) const {
  const Eigen::VectorXd q = quad_(t);
  const double F = q[0], G = q[1], mid = t + q[2] + q[3];
  const double s = std::sin(t), c = std::cos(t);
  Mat3 u;
  u << s, F * s - G * c, c - 1.0,
      -G, mid, -F,
      1.0 - c, -F * c - G * s, s;
  return u;
}

double AnnulusClosedForm::det_op(double t) const {
  const Eigen::VectorXd q = quad_(t);
  const double F = q[0], G = q[1], mid = t + q[2] + q[3];
  return -std::sin(t) * (F * F + G * G) + 2.0 * (1.0 - std::cos(t)) * mid;
}

double annulus_det_closed_form(const Expression& f, double x, double z, double t) {
  if (t == 0.0) return 0.0;
  return AnnulusClosedForm(f, x, z, t).det_op(t);
}

}  // namespace wkbconj

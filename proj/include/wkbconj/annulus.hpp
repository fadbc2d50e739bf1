// Closed forms for the twisted solid-torus example: coordinates (x, y, z) on
// S^1 x S^1 x [z_lo, z_hi], metric z dx^2 + (dy + f(x) dz)^2 + z^{-1} dz^2,
// steady velocity field u = d/dx.  In the orthonormal frame
//   e1 = z^{-1/2} d/dx,  e2 = d/dy,  e3 = z^{1/2} (d/dz - f(x) d/dy)
// everything reduces to scalar quadratures of k(t) = sqrt(z)(f(x+t) - f(x)).
#pragma once

#include "wkbconj/chart.hpp"
#include "wkbconj/field.hpp"
#include "wkbconj/metric.hpp"
#include "wkbconj/ode45.hpp"

namespace wkbconj {

// f is an expression in x1 only.
ExprMatrix annulus_metric_exprs(const Expression& f);
ExprVec3 annulus_velocity_exprs();
Chart annulus_chart(double z_lo = 1.0, double z_hi = 2.0);

inline Vec3 annulus_omega_frame() { return Vec3(0.0, 1.0, 0.0); }

double annulus_k(const Expression& f, double t, double x, double z);
Mat3 annulus_lambda(const Expression& f, double t, double x, double z);

// Cumulative quadratures F = int k cos, G = int k sin, I2 = int k^2,
// I3 = int (G F' - F G'), integrated adaptively once up to t_max.
class AnnulusClosedForm {
 public:
  AnnulusClosedForm(const Expression& f, double x, double z, double t_max,
                    double rtol = 1e-12);

  Mat3 op(double t) const;       // solution operator, op(0) = 0, op'(0) = id
  double det_op(double t) const;
  double F(double t) const;
  double G(double t) const;
  double t_end() const { return quad_.t_end(); }
  Mat3 lambda(double t) const { return annulus_lambda(f_, t, x_, z_); }

 private:
  Expression f_;
  double x_, z_;
  DenseSolution quad_;
};

double annulus_det_closed_form(const Expression& f, double x, double z, double t);

}  // namespace wkbconj

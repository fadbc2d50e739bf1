// Right-translated WKB amplitude equation along a trajectory,
//     D alpha/dt + grad_alpha u = 2 <grad_alpha u, grad Phi>/<grad Phi, grad Phi> grad Phi,
// with grad Phi(t) = (Deta(t)^{-1})^* grad Phi_0, and its left-translated
// counterpart beta(t) with alpha(t) = Deta(t) beta(t).
#pragma once

#include "wkbconj/flow.hpp"
#include "wkbconj/wkb.hpp"

namespace wkbconj {

struct RightFormProblem {
  VectorField u;
  Metric g;
  Chart chart;
  Vec3 x0 = Vec3::Zero();
  Vec3 grad_phi0 = Vec3::UnitX();  // nonzero, chart components
  Vec3 alpha0 = Vec3::UnitY();     // g-orthogonal to grad_phi0
};

class RightFormSolution {
 public:
  Vec3 alpha(double t) const;
  Vec3 grad_phi(double t) const;  // contravariant components at eta(t)
  double q(double t) const;
  Vec3 eta(double t) const;
  Mat3 d_eta(double t) const;
  // <alpha, grad Phi>_{g(eta)}; preserved by the equation.
  double constraint_residual(double t) const;
  double t_end() const { return sol_.t_end(); }

 private:
  friend RightFormSolution solve_right_form(const RightFormProblem&, double,
                                            const OdeOptions&);
  DenseSolution sol_;
  RightFormProblem prob_;
  Mat3 g0_ = Mat3::Identity();
};

// Throws GradientVanished when |grad Phi| falls below 1e-12 along the path.
RightFormSolution solve_right_form(const RightFormProblem& prob, double t_max,
                                   const OdeOptions& opts = {});

// beta solves the left-translated amplitude equation
//     d/dt(pi Lambda beta) + <omega0, xi0> xi0 x beta = 0,
// with xi0 = grad Phi_0 / |grad Phi_0|; its fundamental matrix is W, so
// beta is recovered from the co-integrated reduced system.
class LeftFormSolution {
 public:
  Vec3 beta(double t) const;   // chart components, in T_{x0}
  Vec3 alpha(double t) const;  // Deta(t) beta(t)
  double t_end() const { return w_.t_end(); }

 private:
  friend LeftFormSolution solve_left_form(const RightFormProblem&, double,
                                          const OdeOptions&);
  WSolution w_;
  Vec2 b0_ = Vec2::Zero();
  Mat3 frame_ = Mat3::Identity();
};

LeftFormSolution solve_left_form(const RightFormProblem& prob, double t_max,
                                 const OdeOptions& opts = {});

// sup_t || alpha_right(t) - Deta(t) beta(t) ||_{g(eta)} over n_samples times.
double left_right_max_deviation(const RightFormProblem& prob, double t_max,
                                int n_samples = 400, const OdeOptions& opts = {});

}  // namespace wkbconj

// Lagrangian flow of a velocity field together with its Jacobian, and the
// metric pullback path Lambda(t) = Deta^T g(eta) Deta expressed in an
// orthonormal frame at the base point.
#pragma once

#include <vector>

#include "wkbconj/chart.hpp"
#include "wkbconj/field.hpp"
#include "wkbconj/metric.hpp"
#include "wkbconj/ode45.hpp"

namespace wkbconj {

struct FlowState {
  double t = 0.0;
  Vec3 eta = Vec3::Zero();
  Mat3 d_eta = Mat3::Identity();
};

class FlowSolution {
 public:
  double t_end() const { return sol_.t_end(); }

  Vec3 eta(double t) const { return chart_.wrap(eta_unwrapped(t)); }
  Vec3 eta_unwrapped(double t) const;
  Mat3 d_eta(double t) const;
  FlowState state(double t) const { return {t, eta(t), d_eta(t)}; }

  // Pullback in the orthonormal frame at x0; Lambda(0) = id.
  Mat3 lambda_frame(double t) const;

  // det(Deta) sqrt(det g(eta)) / sqrt(det g(x0)) - 1; zero for a
  // volume-preserving flow.
  double volume_residual(double t) const;

  const Mat3& frame() const { return frame_; }
  const Vec3& omega_frame() const { return omega_frame_; }  // curl u0(x0), frame comps
  const Vec3& base_point() const { return x0_; }
  const Chart& chart() const { return chart_; }

 private:
  friend FlowSolution advance_flow(const VectorField&, const Metric&, const Chart&,
                                   const Vec3&, double, const OdeOptions&);
  DenseSolution sol_;
  Metric g_;
  Chart chart_;
  Vec3 x0_ = Vec3::Zero();
  Mat3 frame_ = Mat3::Identity();
  Vec3 omega_frame_ = Vec3::Zero();
  double sqrt_g0_ = 1.0;
};

// Integrates eta' = u(t, eta), Deta' = (du/dx)(t, eta) Deta jointly from
// (x0, id).  Periodic coordinates are left unwrapped during integration.
// Throws TrajectoryLeftChart when eta exits a non-periodic chart direction.
FlowSolution advance_flow(const VectorField& u, const Metric& g, const Chart& chart,
                          const Vec3& x0, double t_end, const OdeOptions& opts = {});

struct PullbackPath {
  std::vector<double> times;
  std::vector<Mat3> lambda;
  Vec3 omega_frame = Vec3::Zero();
};

PullbackPath metric_pullback(const FlowSolution& flow, const std::vector<double>& times);

}  // namespace wkbconj

// Velocity fields in chart components and the first-order differential
// operators of three-dimensional vector calculus with respect to a metric.
#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>

#include "wkbconj/expression.hpp"
#include "wkbconj/metric.hpp"
#include "wkbconj/types.hpp"

namespace wkbconj {

using ExprVec3 = std::array<Expression, 3>;

class VectorField {
 public:
  VectorField() {
    *this = from_expressions(
        {Expression::constant(0), Expression::constant(0), Expression::constant(0)}, true);
  }

  static VectorField from_expressions(const ExprVec3& u, bool steady);
  static VectorField from_function(std::function<Vec3(double, const Vec3&)> u, bool steady);

  Vec3 at(double t, const Vec3& x) const { return eval_(t, x); }

  // jac(i,j) = d u^i / d x^j.  Exact for expression-backed fields, fourth
  // order central differences otherwise.
  Mat3 jacobian(double t, const Vec3& x) const;

  bool steady() const { return steady_; }
  bool has_expressions() const { return exprs_.has_value(); }
  const ExprVec3& expressions() const { return *exprs_; }

 private:
  struct Uninit {};
  explicit VectorField(Uninit) {}

  std::function<Vec3(double, const Vec3&)> eval_;
  std::function<Mat3(double, const Vec3&)> jac_;
  std::optional<ExprVec3> exprs_;
  bool steady_ = true;
};

// Contravariant curl with respect to the metric and chart orientation:
// (curl u)^i = eps^{ijk} d_j (g_kl u^l) / sqrt(det g).  Exact when both the
// field and the metric are expression-backed.
VectorField curl_field(const VectorField& u, const Metric& g);
Vec3 curl(const VectorField& u, const Metric& g, const Vec3& x, double t = 0.0);

// div u = d_i (sqrt(det g) u^i) / sqrt(det g).
double divergence(const VectorField& u, const Metric& g, const Vec3& x, double t = 0.0);

// Lie bracket [a,b]^i = a^j d_j b^i - b^j d_j a^i.
Vec3 lie_bracket(const VectorField& a, const VectorField& b, double t, const Vec3& x);

// sup over samples of || [u, curl u] ||_g at t = 0; small values certify a
// steady solution of the ideal fluid equations.
double steadiness_residual(const VectorField& u, const Metric& g,
                           std::span<const Vec3> samples);

}  // namespace wkbconj

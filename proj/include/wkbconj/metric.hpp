// Riemannian metric on a chart: covariant coefficients, volume density,
// Christoffel symbols, and orthonormal frames.
#pragma once

#include <array>
#include <functional>
#include <optional>

#include "wkbconj/expression.hpp"
#include "wkbconj/types.hpp"

namespace wkbconj {

using ExprMatrix = std::array<std::array<Expression, 3>, 3>;

class Metric {
 public:
  Metric() { *this = euclidean(); }

  static Metric euclidean();
  static Metric from_expressions(const ExprMatrix& g);
  static Metric from_function(std::function<Mat3(const Vec3&)> g);

  Mat3 at(const Vec3& x) const;
  Mat3 inverse_at(const Vec3& x) const { return at(x).inverse(); }
  double det_at(const Vec3& x) const { return at(x).determinant(); }
  double sqrt_det(const Vec3& x) const { return std::sqrt(det_at(x)); }

  // dg[k](i,j) = d g_ij / d x_k; analytic for expression-backed metrics.
  Mat3 partial(const Vec3& x, int k) const;

  // christ[k](i,j) = Gamma^k_ij.
  std::array<Mat3, 3> christoffel(const Vec3& x) const;

  double inner(const Vec3& x, const Vec3& a, const Vec3& b) const {
    return a.dot(at(x) * b);
  }
  double norm(const Vec3& x, const Vec3& a) const { return std::sqrt(inner(x, a, a)); }

  bool has_expressions() const { return exprs_.has_value(); }
  const ExprMatrix& expressions() const { return *exprs_; }

 private:
  struct Uninit {};
  explicit Metric(Uninit) {}

  std::function<Mat3(const Vec3&)> eval_;
  std::optional<ExprMatrix> exprs_;
  std::optional<std::array<ExprMatrix, 3>> dexprs_;  // dexprs_[k] holds d/dx_k of g
};

// Gram-Schmidt on the chart basis at x; columns are the frame vectors e1,e2,e3
// in chart components.  Orientation matches the chart basis.  Throws
// NonSpdMetric when g(x) is not positive definite.
Mat3 orthonormal_frame(const Metric& g, const Vec3& x);

// Components of the chart vector v in the frame E at x: E * out == v.
inline Vec3 frame_components(const Mat3& frame, const Mat3& g_at_x, const Vec3& v) {
  return frame.transpose() * g_at_x * v;
}

}  // namespace wkbconj

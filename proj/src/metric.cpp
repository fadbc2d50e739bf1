#include "wkbconj/metric.hpp"

#include <cmath>

#include "wkbconj/fd.hpp"

namespace wkbconj {

Metric Metric::euclidean() {
  ExprMatrix g;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) g[i][j] = Expression::constant(i == j ? 1.0 : 0.0);
  return from_expressions(g);
}

Metric Metric::from_expressions(const ExprMatrix& g) {
  Metric m{Uninit{}};
  m.exprs_ = g;
  std::array<ExprMatrix, 3> dg;
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) dg[k][i][j] = g[i][j].derivative(k);
  m.dexprs_ = dg;
  m.eval_ = [g](const Vec3& x) {
    Mat3 out;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) out(i, j) = g[i][j].eval(x, 0.0);
    return Mat3(0.5 * (out + out.transpose()));
  };
  return m;
}

Metric Metric::from_function(std::function<Mat3(const Vec3&)> g) {
  Metric m{Uninit{}};
  m.eval_ = std::move(g);
  return m;
}

Mat3 Metric::at(const Vec3& x) const { return eval_(x); }

Mat3 Metric::partial(const Vec3& x, int k) const {
  if (dexprs_) {
    Mat3 out;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) out(i, j) = (*dexprs_)[k][i][j].eval(x, 0.0);
    return Mat3(0.5 * (out + out.transpose()));
  }
  Mat3 out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      out(i, j) = fd::derivative(
          [&](double s) {
            Vec3 xs = x;
            xs[k] = s;
            return eval_(xs)(i, j);
          },
          x[k]);
    }
  return out;
}

std::array<Mat3, 3> Metric::christoffel(const Vec3& x) const {
  const Mat3 ginv = inverse_at(x);
  std::array<Mat3, 3> dg;
  for (int k = 0; k < 3; ++k) dg[k] = partial(x, k);
  std::array<Mat3, 3> out;
  for (int k = 0; k < 3; ++k) {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int l = 0; l < 3; ++l)
          s += ginv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
        out[k](i, j) = 0.5 * s;
      }
  }
  return out;
}

Mat3 orthonormal_frame(const Metric& metric, const Vec3& x) {
  const Mat3 g = metric.at(x);
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + g.cwiseAbs().maxCoeff()))
    throw NonSpdMetric("metric is not symmetric at the requested point");

  const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
  Mat3 frame;
  for (int i = 0; i < 3; ++i) {
    Vec3 v = Vec3::Unit(i);
    for (int j = 0; j < i; ++j) {
      const Vec3 e = frame.col(j);
      v -= e.dot(g * v) * e;
    }
    const double n2 = v.dot(g * v);
    if (!(n2 > 1e-13 * scale))
      throw NonSpdMetric("metric is not positive definite at the requested point");
    frame.col(i) = v / std::sqrt(n2);
  }
  return frame;
}

}  // namespace wkbconj

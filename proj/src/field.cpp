#include "wkbconj/field.hpp"

#include <cmath>

#include "wkbconj/fd.hpp"

namespace wkbconj {

VectorField VectorField::from_expressions(const ExprVec3& u, bool steady) {
  VectorField f{Uninit{}};
  f.exprs_ = u;
  f.steady_ = steady;
  f.eval_ = [u](double t, const Vec3& x) {
    return Vec3(u[0].eval(x, t), u[1].eval(x, t), u[2].eval(x, t));
  };
  std::array<std::array<Expression, 3>, 3> du;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) du[i][j] = u[i].derivative(j);
  f.jac_ = [du](double t, const Vec3& x) {
    Mat3 out;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) out(i, j) = du[i][j].eval(x, t);
    return out;
  };
  return f;
}

VectorField VectorField::from_function(std::function<Vec3(double, const Vec3&)> u, bool steady) {
  VectorField f{Uninit{}};
  f.steady_ = steady;
  f.eval_ = std::move(u);
  return f;
}

Mat3 VectorField::jacobian(double t, const Vec3& x) const {
  if (jac_) return jac_(t, x);
  Mat3 out;
  for (int j = 0; j < 3; ++j) {
    for (int i = 0; i < 3; ++i) {
      out(i, j) = fd::derivative(
          [&](double s) {
            Vec3 xs = x;
            xs[j] = s;
            return eval_(t, xs)[i];
          },
          x[j]);
    }
  }
  return out;
}

namespace {

Expression expr_det3(const ExprMatrix& g) {
  return g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1]) -
         g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0]) +
         g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]);
}

// Covariant components of u with respect to g, symbolically.
ExprVec3 expr_lower(const ExprMatrix& g, const ExprVec3& u) {
  ExprVec3 w;
  for (int k = 0; k < 3; ++k)
    w[k] = g[k][0] * u[0] + g[k][1] * u[1] + g[k][2] * u[2];
  return w;
}

}  // namespace

VectorField curl_field(const VectorField& u, const Metric& g) {
  if (u.has_expressions() && g.has_expressions()) {
    const ExprMatrix& ge = g.expressions();
    const ExprVec3 w = expr_lower(ge, u.expressions());
    const Expression s = Expression::sqrt(expr_det3(ge));
    ExprVec3 c;
    c[0] = (w[2].derivative(1) - w[1].derivative(2)) / s;
    c[1] = (w[0].derivative(2) - w[2].derivative(0)) / s;
    c[2] = (w[1].derivative(0) - w[0].derivative(1)) / s;
    return VectorField::from_expressions(c, u.steady());
  }
  // Fallback: differentiate the covariant components numerically.
  auto eval = [u, g](double t, const Vec3& x) {
    auto wfun = [&](const Vec3& y) -> Vec3 { return g.at(y) * u.at(t, y); };
    Mat3 dw;  // dw(k,j) = d w_k / d x_j
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        dw(k, j) = fd::derivative(
            [&](double sx) {
              Vec3 xs = x;
              xs[j] = sx;
              return wfun(xs)[k];
            },
            x[j]);
    const double s = g.sqrt_det(x);
    return Vec3((dw(2, 1) - dw(1, 2)) / s, (dw(0, 2) - dw(2, 0)) / s,
                (dw(1, 0) - dw(0, 1)) / s);
  };
  return VectorField::from_function(eval, u.steady());
}

Vec3 curl(const VectorField& u, const Metric& g, const Vec3& x, double t) {
  return curl_field(u, g).at(t, x);
}

double divergence(const VectorField& u, const Metric& g, const Vec3& x, double t) {
  if (u.has_expressions() && g.has_expressions()) {
    const Expression s = Expression::sqrt(expr_det3(g.expressions()));
    const ExprVec3& ue = u.expressions();
    Expression acc = Expression::constant(0.0);
    for (int i = 0; i < 3; ++i) acc = acc + (s * ue[i]).derivative(i);
    return (acc / s).eval(x, t);
  }
  double acc = 0.0;
  for (int i = 0; i < 3; ++i) {
    acc += fd::derivative(
        [&](double sx) {
          Vec3 xs = x;
          xs[i] = sx;
          return g.sqrt_det(xs) * u.at(t, xs)[i];
        },
        x[i]);
  }
  return acc / g.sqrt_det(x);
}

Vec3 lie_bracket(const VectorField& a, const VectorField& b, double t, const Vec3& x) {
  return b.jacobian(t, x) * a.at(t, x) - a.jacobian(t, x) * b.at(t, x);
}

double steadiness_residual(const VectorField& u, const Metric& g,
                           std::span<const Vec3> samples) {
  const VectorField omega = curl_field(u, g);
  double worst = 0.0;
  for (const Vec3& x : samples) {
    const Vec3 br = lie_bracket(u, omega, 0.0, x);
    worst = std::max(worst, g.norm(x, br));
  }
  return worst;
}

}  // namespace wkbconj

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "wkbconj/annulus.hpp"
#include "wkbconj/flow.hpp"

using namespace wkbconj;

namespace {

Chart box(double half) {
  Chart c;
  c.lo = Vec3(-half, -half, -half);
  c.hi = Vec3(half, half, half);
  return c;
}

VectorField expr_field(const char* u1, const char* u2, const char* u3, bool steady = true) {
  return VectorField::from_expressions(
      {Expression::parse(u1), Expression::parse(u2), Expression::parse(u3)}, steady);
}

}  // namespace

TEST_CASE("flow: constant field translates, Jacobian stays the identity") {
  const VectorField u = expr_field("0.3", "-0.2", "0.1");
  const auto flow = advance_flow(u, Metric::euclidean(), box(10), Vec3(0, 0, 0), 5.0);
  const Vec3 eta = flow.eta(4.0);
  CHECK((eta - Vec3(1.2, -0.8, 0.4)).norm() < 1e-10);
  CHECK((flow.d_eta(4.0) - Mat3::Identity()).norm() < 1e-10);
}

TEST_CASE("flow: annulus velocity is a coordinate translation") {
  const Metric g = Metric::from_expressions(annulus_metric_exprs(Expression::parse("sin(x1)")));
  const VectorField u = VectorField::from_expressions(annulus_velocity_exprs(), true);
  const Vec3 x0(0.9, 0.3, 1.4);
  const auto flow = advance_flow(u, g, annulus_chart(), x0, 10.0);
  const double t = 7.3;
  CHECK((flow.eta_unwrapped(t) - Vec3(0.9 + t, 0.3, 1.4)).norm() < 1e-9);
  // wrapped output stays in [0, 2pi)
  const Vec3 wrapped = flow.eta(t);
  CHECK(wrapped[0] == doctest::Approx(std::fmod(0.9 + t, 2 * std::numbers::pi)));
  CHECK((flow.d_eta(t) - Mat3::Identity()).norm() < 1e-9);
}

TEST_CASE("flow: linear shear matches the exact linear solution") {
  const VectorField u = expr_field("x2", "0", "0");
  const Vec3 x0(0.2, 0.7, -0.4);
  const auto flow = advance_flow(u, Metric::euclidean(), box(20), x0, 8.0);
  for (double t : {0.5, 3.0, 8.0}) {
    Mat3 expected = Mat3::Identity();
    expected(0, 1) = t;
    CHECK((flow.d_eta(t) - expected).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((flow.eta(t) - Vec3(0.2 + t * 0.7, 0.7, -0.4)).norm() < 1e-9);
  }
}

TEST_CASE("flow: Killing rotation has orthogonal Jacobian and identity pullback") {
  const VectorField u = expr_field("-0.5*x2", "0.5*x1", "0");
  const auto flow = advance_flow(u, Metric::euclidean(), box(10), Vec3(1.0, 0.5, 0.0), 12.0);
  for (double t : {1.0, 6.0, 12.0}) {
    const Mat3 d = flow.d_eta(t);
    CHECK((d.transpose() * d - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((flow.lambda_frame(t) - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("flow: volume preservation along a genuinely three-dimensional field") {
  const VectorField u = expr_field("sin(x3)", "sin(x1)", "sin(x2)", false);
  const auto flow = advance_flow(u, Metric::euclidean(), box(30), Vec3(0.3, -0.2, 0.5), 10.0);
  for (int i = 0; i <= 40; ++i)
    CHECK(std::abs(flow.volume_residual(10.0 * i / 40.0)) < 1e-6);
}

TEST_CASE("flow: annulus volume preservation with a curved metric") {
  const Metric g = Metric::from_expressions(annulus_metric_exprs(Expression::parse("sin(x1)")));
  const VectorField u = VectorField::from_expressions(annulus_velocity_exprs(), true);
  const auto flow = advance_flow(u, g, annulus_chart(), Vec3(2.2, 0.0, 1.8), 12.0);
  for (int i = 0; i <= 48; ++i)
    CHECK(std::abs(flow.volume_residual(12.0 * i / 48.0)) < 1e-6);
}

TEST_CASE("pullback: identity at t = 0, symmetric SPD along the path") {
  const Metric g = Metric::from_expressions(annulus_metric_exprs(Expression::parse("sin(x1)")));
  const VectorField u = VectorField::from_expressions(annulus_velocity_exprs(), true);
  const auto flow = advance_flow(u, g, annulus_chart(), Vec3(0.9, 0.0, 1.4), 4 * std::numbers::pi);
  std::vector<double> times;
  for (int i = 0; i <= 100; ++i) times.push_back(4 * std::numbers::pi * i / 100.0);
  const PullbackPath path = metric_pullback(flow, times);

  CHECK((path.lambda.front() - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((path.omega_frame - Vec3(0, 1, 0)).norm() < 1e-10);
  for (const Mat3& lam : path.lambda) {
    CHECK((lam - lam.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(is_spd(lam));
  }
}

TEST_CASE("pullback: integrated path matches the closed form over [0, 4 pi]") {
  const Expression f = Expression::parse("sin(x1)");
  const Metric g = Metric::from_expressions(annulus_metric_exprs(f));
  const VectorField u = VectorField::from_expressions(annulus_velocity_exprs(), true);
  const double x = 2.4, z = 1.25;
  OdeOptions opts;
  opts.rtol = 1e-11;
  opts.atol = 1e-13;
  const auto flow = advance_flow(u, g, annulus_chart(), Vec3(x, 0.7, z),
                                 4 * std::numbers::pi, opts);
  double worst = 0.0;
  for (int i = 0; i <= 200; ++i) {
    const double t = 4 * std::numbers::pi * i / 200.0;
    worst = std::max(worst,
                     (flow.lambda_frame(t) - annulus_lambda(f, t, x, z)).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("flow: leaving a non-periodic chart raises TrajectoryLeftChart") {
  const VectorField u = expr_field("1", "0", "0");
  Chart c = box(1.0);
  try {
    advance_flow(u, Metric::euclidean(), c, Vec3(0.5, 0, 0), 5.0);
    FAIL("expected TrajectoryLeftChart");
  } catch (const TrajectoryLeftChart& e) {
    CHECK(e.t_exit == doctest::Approx(0.5).epsilon(0.05));
  }
  CHECK_THROWS_AS(advance_flow(u, Metric::euclidean(), c, Vec3(5.0, 0, 0), 1.0),
                  TrajectoryLeftChart);
}

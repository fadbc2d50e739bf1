#include <doctest.h>

#include <cmath>
#include <random>

#include "wkbconj/field_io.hpp"
#include "wkbconj/right_form.hpp"
#include "wkbconj/synthetic.hpp"

#include "oracles.hpp"

using namespace wkbconj;

namespace {

RightFormProblem admissible(const FieldConfig& fc, const Vec3& x, std::mt19937& rng) {
  RightFormProblem prob;
  prob.u = fc.velocity;
  prob.g = fc.metric;
  prob.chart = fc.chart;
  prob.x0 = x;
  const Mat3 g0 = fc.metric.at(x);
  prob.grad_phi0 = random_unit(rng);
  prob.grad_phi0 /= fc.metric.norm(x, prob.grad_phi0);
  Vec3 a0 = random_unit(rng);
  a0 -= a0.dot(g0 * prob.grad_phi0) / prob.grad_phi0.dot(g0 * prob.grad_phi0) * prob.grad_phi0;
  prob.alpha0 = a0 / fc.metric.norm(x, a0);
  return prob;
}

}  // namespace

TEST_CASE("right form: constant field leaves the amplitude constant") {
  RightFormProblem prob;
  prob.u = VectorField::from_expressions(
      {Expression::parse("0.4"), Expression::parse("0.1"), Expression::parse("-0.2")}, true);
  prob.g = Metric::euclidean();
  prob.chart.lo = Vec3(-10, -10, -10);
  prob.chart.hi = Vec3(10, 10, 10);
  prob.x0 = Vec3(0.0, 0.0, 0.0);
  prob.grad_phi0 = Vec3(1, 0, 0);
  prob.alpha0 = Vec3(0, 2, 1);
  const auto sol = solve_right_form(prob, 8.0);
  for (double t : {1.0, 5.0, 8.0}) {
    CHECK((sol.alpha(t) - prob.alpha0).norm() < 1e-10);
    CHECK(std::abs(sol.q(t)) < 1e-12);
  }
}

TEST_CASE("right form: plane shear matches a fixed-step reference integration") {
  const LoadedConfig cfg = parse_field_json(builtin_shear_json());
  RightFormProblem prob;
  prob.u = cfg.field.velocity;
  prob.g = cfg.field.metric;
  prob.chart = cfg.field.chart;
  prob.x0 = Vec3(0.0, 0.5, 0.0);
  prob.grad_phi0 = Vec3(1, 0, 0);
  prob.alpha0 = Vec3(0, 0.7, -0.4);
  const double t_end = 6.0;
  const auto sol = solve_right_form(prob, t_end);

  // Independent reference: Euclidean space, Deta = id + t E12 in closed form,
  // grad u constant; alpha' = -grad_alpha u + 2 q grad Phi.
  auto rhs = [](double t, const Eigen::VectorXd& y) -> Eigen::VectorXd {
    const oracles::Vec3 alpha(y[0], y[1], y[2]);
    oracles::Mat3 ju = oracles::Mat3::Zero();
    ju(0, 1) = 1.0;
    oracles::Mat3 deta_inv_t = oracles::Mat3::Identity();
    deta_inv_t(1, 0) = -t;  // (Deta^{-1})^T for Deta = id + t E12
    const oracles::Vec3 gp = deta_inv_t * oracles::Vec3(1, 0, 0);
    const oracles::Vec3 nau = ju * alpha;
    const double q = nau.dot(gp) / gp.dot(gp);
    const oracles::Vec3 rhs3 = -nau + 2.0 * q * gp;
    return (Eigen::VectorXd(3) << rhs3[0], rhs3[1], rhs3[2]).finished();
  };
  Eigen::VectorXd a0(3);
  a0 << 0.0, 0.7, -0.4;
  const Eigen::VectorXd coarse = oracles::rk4(rhs, a0, 0.0, t_end, 20000);
  const Eigen::VectorXd fine = oracles::rk4(rhs, a0, 0.0, t_end, 40000);
  REQUIRE((coarse - fine).norm() < 1e-10);  // reference is converged
  CHECK((sol.alpha(t_end) - Vec3(fine[0], fine[1], fine[2])).norm() < 1e-7);
}

TEST_CASE("right form: transversality constraint is preserved") {
  const LoadedConfig cfg = parse_field_json(builtin_annulus_json());
  std::mt19937 rng(51);
  for (int i = 0; i < 5; ++i) {
    const auto prob = admissible(cfg.field, Vec3(0.9, 0.0, 1.4), rng);
    const auto sol = solve_right_form(prob, 10.0);
    for (int k = 0; k <= 20; ++k)
      CHECK(std::abs(sol.constraint_residual(10.0 * k / 20.0)) < 1e-8);
  }
}

TEST_CASE("right form: alpha equals Deta beta for torus and shear") {
  std::mt19937 rng(53);
  const LoadedConfig annulus = parse_field_json(builtin_annulus_json());
  const LoadedConfig shear = parse_field_json(builtin_shear_json());
  OdeOptions opts;
  opts.rtol = 1e-10;
  opts.atol = 1e-13;
  const std::pair<const LoadedConfig*, Vec3> cases[2] = {
      {&annulus, Vec3(0.9, 0.0, 1.4)}, {&shear, Vec3(0.0, 0.3, 0.1)}};
  for (const auto& [cfg, x] : cases) {
    for (int i = 0; i < 3; ++i) {
      const auto prob = admissible(cfg->field, x, rng);
      CHECK(left_right_max_deviation(prob, 10.0, 200, opts) < 1e-6);
    }
  }
}

TEST_CASE("right form: rejects bad initial data") {
  const LoadedConfig cfg = parse_field_json(builtin_shear_json());
  RightFormProblem prob;
  prob.u = cfg.field.velocity;
  prob.g = cfg.field.metric;
  prob.chart = cfg.field.chart;
  prob.x0 = Vec3(0, 0.3, 0);
  prob.grad_phi0 = Vec3::Zero();
  prob.alpha0 = Vec3(0, 1, 0);
  CHECK_THROWS_AS(solve_right_form(prob, 1.0), GradientVanished);

  prob.grad_phi0 = Vec3(1, 0, 0);
  prob.alpha0 = Vec3(1, 1, 0);  // not orthogonal
  CHECK_THROWS_AS(solve_right_form(prob, 1.0), std::invalid_argument);
}

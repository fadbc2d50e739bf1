#include <doctest.h>

#include <cmath>
#include <numbers>

#include "wkbconj/annulus.hpp"
#include "wkbconj/wkb.hpp"

#include "oracles.hpp"

using namespace wkbconj;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

TEST_CASE("annulus: f = 0 collapses to the flat case") {
  const Expression f0 = Expression::parse("0");
  CHECK(annulus_k(f0, 2.3, 0.4, 1.5) == 0.0);
  CHECK((annulus_lambda(f0, 2.3, 0.4, 1.5) - Mat3::Identity()).norm() == 0.0);

  // det = 2 t (1 - cos t): zeros exactly at t = 2 pi n.
  const AnnulusClosedForm closed(f0, 0.4, 1.5, 3 * kTwoPi);
  for (double t : {1.0, 4.0, 9.0})
    CHECK(closed.det_op(t) == doctest::Approx(2.0 * t * (1.0 - std::cos(t))).epsilon(1e-10));
  CHECK(std::abs(closed.det_op(kTwoPi)) < 1e-9);
  CHECK(std::abs(closed.det_op(2 * kTwoPi)) < 1e-9);
}

TEST_CASE("annulus: f = sin at t = 0 gives k = 0 and the identity") {
  const Expression f = Expression::parse("sin(x1)");
  CHECK(annulus_k(f, 0.0, 1.1, 1.7) == 0.0);
  CHECK((annulus_lambda(f, 0.0, 1.1, 1.7) - Mat3::Identity()).norm() == 0.0);
}

TEST_CASE("annulus: quadratures agree with adaptive Simpson") {
  const Expression f = Expression::parse("sin(x1)");
  const double x = 1.3, z = 1.6, t = 7.5;
  const AnnulusClosedForm closed(f, x, z, 10.0);
  auto k = [&](double s) { return annulus_k(f, s, x, z); };
  const double f_ref = oracles::adaptive_simpson([&](double s) { return k(s) * std::cos(s); },
                                                 0.0, t);
  const double g_ref = oracles::adaptive_simpson([&](double s) { return k(s) * std::sin(s); },
                                                 0.0, t);
  CHECK(closed.F(t) == doctest::Approx(f_ref).epsilon(1e-10));
  CHECK(closed.G(t) == doctest::Approx(g_ref).epsilon(1e-10));
}

TEST_CASE("annulus: closed-form determinant matches the integrated operator") {
  const Expression f = Expression::parse("sin(x1)");
  const double x = 0.8, z = 1.4;
  const AnnulusClosedForm closed(f, x, z, 10.0);
  const LambdaSource src = LambdaSource::from_function(
      [&](double t) { return annulus_lambda(f, t, x, z); }, annulus_omega_frame());
  OdeOptions opts;
  opts.rtol = 1e-11;
  opts.atol = 1e-13;
  const FullOpSolution num = solve_full_operator(src, 10.0, opts);
  for (int i = 1; i <= 20; ++i) {
    const double t = 10.0 * i / 20.0;
    CHECK(num.det_op(t) == doctest::Approx(closed.det_op(t)).epsilon(1e-6));
  }
}

TEST_CASE("annulus: first determinant zero sits at 2 pi for f = sin") {
  const Expression f = Expression::parse("sin(x1)");
  for (const auto& [x, z] : {std::pair{0.0, 1.0}, {2.1, 1.5}, {4.4, 2.0}}) {
    const LambdaSource src = LambdaSource::from_function(
        [&, x = x, z = z](double t) { return annulus_lambda(f, t, x, z); },
        annulus_omega_frame());
    const auto ev = first_conjugate_time_full(src, 9.0);
    REQUIRE(ev.has_value());
    CHECK(std::abs(ev->t - kTwoPi) < 1e-6);
    CHECK(ev->mode == EventMode::DetZero3D);

    // Null direction proportional to (F(2 pi), 0, -G(2 pi)).
    const AnnulusClosedForm closed(f, x, z, 9.0);
    Vec3 v(closed.F(kTwoPi), 0.0, -closed.G(kTwoPi));
    v.normalize();
    const Vec3 k = ev->kernel3.normalized();
    CHECK(std::min((k - v).norm(), (k + v).norm()) < 1e-4);
  }
}

TEST_CASE("annulus: convenience determinant wrapper") {
  const Expression f = Expression::parse("sin(x1)");
  CHECK(annulus_det_closed_form(f, 0.3, 1.2, 0.0) == 0.0);
  const AnnulusClosedForm closed(f, 0.3, 1.2, 5.0);
  CHECK(annulus_det_closed_form(f, 0.3, 1.2, 5.0) ==
        doctest::Approx(closed.det_op(5.0)).epsilon(1e-10));
}

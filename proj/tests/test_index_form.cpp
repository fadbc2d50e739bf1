#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "wkbconj/index_form.hpp"
#include "wkbconj/synthetic.hpp"
#include "wkbconj/wkb.hpp"

using namespace wkbconj;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Constant coefficients Ltilde = a id: the spectrum of the quadratic form is
// lambda_m = ((2 pi m a / T)^2 - c^2) / (4 a), m = 1, 2, ...; derived by
// expanding f + i g in exponentials with Dirichlet conditions.
double constant_coefficient_lambda(double a, double c, double T) {
  const double k = kTwoPi * a / T;
  return (k * k - c * c) / (4.0 * a);
}

}  // namespace

TEST_CASE("index form: constant coefficients reproduce the exponential analysis") {
  auto id2 = [](double) { return Mat2(Mat2::Identity()); };
  for (double c : {0.7, 1.0, 1.6}) {
    for (double factor : {0.6, 0.95, 1.0, 1.05, 1.5}) {
      const double T = factor * kTwoPi / c;
      const double expected = constant_coefficient_lambda(1.0, c, T);
      const double got = index_form_lambda(id2, c, T).lambda;
      CHECK(got == doctest::Approx(expected).epsilon(2e-3));
    }
  }
  // Scaled metric block.
  const double a = 1.7, c = 0.9, T = 5.0;
  auto scaled = [a](double) { return Mat2(a * Mat2::Identity()); };
  CHECK(index_form_lambda(scaled, c, T).lambda ==
        doctest::Approx(constant_coefficient_lambda(a, c, T)).epsilon(2e-3));
}

TEST_CASE("index form: sign tracks the first crossing of the trivial pullback") {
  const double c = 1.0;
  auto id2 = [](double) { return Mat2(Mat2::Identity()); };
  const double t0 = kTwoPi / c;
  CHECK(index_form_lambda(id2, c, 0.95 * t0).lambda > 0.0);
  CHECK(std::abs(index_form_lambda(id2, c, t0).lambda) < 1e-3);
  CHECK(index_form_lambda(id2, c, 1.05 * t0).lambda < 0.0);
}

TEST_CASE("index form: sign agrees with the opposite orientation") {
  // lambda is invariant under omega -> -omega (g -> -g symmetry).
  auto id2 = [](double) { return Mat2(Mat2::Identity()); };
  for (double T : {3.0, 6.0, 7.5}) {
    const double plus = index_form_lambda(id2, 1.1, T).lambda;
    const double minus = index_form_lambda(id2, -1.1, T).lambda;
    CHECK(plus == doctest::Approx(minus).epsilon(1e-8));
  }
}

TEST_CASE("index form: sign flips across a transversal crossing of a varying path") {
  std::mt19937 rng(61);
  int checked = 0;
  while (checked < 3) {
    const SyntheticSystem sys = random_spd_system(rng);
    const WSolution w = evolve_w(ReducedSystem(sys.source, sys.direction), 14.0);
    const auto events = wkb_conjugate_times(w, {}, true);
    if (events.empty() || events.front().mode != EventMode::TraceCrossing) continue;
    const double t0 = events.front().t;
    if (t0 < 1.0 || t0 > 11.0) continue;
    ++checked;

    const LambdaSource src = sys.source;
    const WkbDirection dir = sys.direction;
    auto lt = [src, dir](double t) { return pi_lambda_pi(src.lambda(t), dir); };
    CHECK(index_form_lambda(lt, sys.c, 0.95 * t0).lambda > 0.0);
    CHECK(index_form_lambda(lt, sys.c, 1.05 * t0).lambda < 0.0);
  }
}

TEST_CASE("index form: argument validation") {
  auto id2 = [](double) { return Mat2(Mat2::Identity()); };
  CHECK_THROWS_AS(index_form_lambda(id2, 1.0, -1.0), std::invalid_argument);
}

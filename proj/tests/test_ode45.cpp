#include <doctest.h>

#include <cmath>

#include "wkbconj/ode45.hpp"

using namespace wkbconj;

TEST_CASE("ode45: exponential decay to tolerance") {
  OdeRhs rhs = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) { dy = -y; };
  Eigen::VectorXd y0(1);
  y0 << 1.0;
  const auto sol = integrate_dense(rhs, y0, 0.0, 5.0);
  for (double t : {0.1, 1.0, 2.5, 5.0})
    CHECK(sol(t)[0] == doctest::Approx(std::exp(-t)).epsilon(1e-8));
}

TEST_CASE("ode45: harmonic oscillator, dense output between steps") {
  OdeRhs rhs = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    dy.resize(2);
    dy[0] = y[1];
    dy[1] = -y[0];
  };
  Eigen::VectorXd y0(2);
  y0 << 1.0, 0.0;
  OdeOptions opts;
  opts.rtol = 1e-10;
  opts.atol = 1e-12;
  const auto sol = integrate_dense(rhs, y0, 0.0, 20.0, opts);
  double worst = 0.0;
  for (int i = 0; i <= 2000; ++i) {
    const double t = 20.0 * i / 2000.0;
    worst = std::max(worst, std::abs(sol(t)[0] - std::cos(t)));
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("ode45: nonautonomous right side") {
  OdeRhs rhs = [](double t, const Eigen::VectorXd&, Eigen::VectorXd& dy) {
    dy[0] = std::cos(t);
  };
  Eigen::VectorXd y0 = Eigen::VectorXd::Zero(1);
  const auto sol = integrate_dense(rhs, y0, 0.0, 3.0);
  CHECK(sol(3.0)[0] == doctest::Approx(std::sin(3.0)).epsilon(1e-9));
}

TEST_CASE("ode45: step failure surfaces as an exception") {
  // Finite-time blowup y' = y^2 from y(0) = 1 at t = 1.
  OdeRhs rhs = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    dy[0] = y[0] * y[0];
  };
  Eigen::VectorXd y0(1);
  y0 << 1.0;
  OdeOptions opts;
  opts.max_steps = 2000;
  CHECK_THROWS_AS(integrate_dense(rhs, y0, 0.0, 2.0, opts), StepFailure);
}

TEST_CASE("ode45: evaluation outside the range is rejected") {
  OdeRhs rhs = [](double, const Eigen::VectorXd&, Eigen::VectorXd& dy) { dy[0] = 1.0; };
  Eigen::VectorXd y0 = Eigen::VectorXd::Zero(1);
  const auto sol = integrate_dense(rhs, y0, 0.0, 1.0);
  CHECK_THROWS_AS(sol(1.5), std::out_of_range);
  CHECK(sol(1.0)[0] == doctest::Approx(1.0));
}

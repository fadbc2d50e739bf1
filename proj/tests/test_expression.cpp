#include <doctest.h>

#include <cmath>

#include "wkbconj/expression.hpp"

#include "oracles.hpp"

using wkbconj::Expression;
using wkbconj::ParseError;

TEST_CASE("expression: literals, precedence, functions") {
  CHECK(Expression::parse("2 + 3*4").eval(0, 0, 0, 0) == doctest::Approx(14.0));
  CHECK(Expression::parse("-x1^2").eval(3, 0, 0, 0) == doctest::Approx(-9.0));
  CHECK(Expression::parse("2^-2").eval(0, 0, 0, 0) == doctest::Approx(0.25));
  CHECK(Expression::parse("2^3^2").eval(0, 0, 0, 0) == doctest::Approx(512.0));  // right assoc
  CHECK(Expression::parse("(1 - 2) / 4").eval(0, 0, 0, 0) == doctest::Approx(-0.25));
  CHECK(Expression::parse("sin(x1)^2 + cos(x1)^2").eval(0.73, 0, 0, 0) ==
        doctest::Approx(1.0));
  CHECK(Expression::parse("sqrt(exp(t))").eval(0, 0, 0, 1.6) ==
        doctest::Approx(std::exp(0.8)));
  CHECK(Expression::parse("x2 * 10 - x3 / 2").eval(0, 1.5, 4.0, 0) == doctest::Approx(13.0));
}

TEST_CASE("expression: named parameters bind at parse time") {
  std::map<std::string, double> params{{"a", 2.5}, {"om", 3.0}};
  const auto e = Expression::parse("a * sin(om * t)", params);
  CHECK(e.eval(0, 0, 0, 0.4) == doctest::Approx(2.5 * std::sin(1.2)));
  CHECK(e.is_constant() == false);
}

TEST_CASE("expression: parse errors carry a position") {
  CHECK_THROWS_AS(Expression::parse("1 + "), ParseError);
  CHECK_THROWS_AS(Expression::parse("sin 3"), ParseError);
  CHECK_THROWS_AS(Expression::parse("foo + 1"), ParseError);
  CHECK_THROWS_AS(Expression::parse("(1 + 2"), ParseError);
  CHECK_THROWS_AS(Expression::parse("1 + 2)"), ParseError);
  try {
    Expression::parse("x1 + bogus");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.position == 5);
  }
}

TEST_CASE("expression: exact derivative matches differences") {
  const auto e = Expression::parse("sin(x1*x2) * exp(-x3/2) + x1^3 / (1 + t^2) + sqrt(x3)");
  const auto check_var = [&](int var) {
    const auto d = e.derivative(var);
    const double base[4] = {0.7, -1.3, 2.1, 0.4};
    auto line = [&](double s) {
      double v[4] = {base[0], base[1], base[2], base[3]};
      v[var] = s;
      return e.eval(v[0], v[1], v[2], v[3]);
    };
    const double numeric = oracles::fd2(line, base[var]);
    const double exact = d.eval(base[0], base[1], base[2], base[3]);
    CHECK(exact == doctest::Approx(numeric).epsilon(1e-7));
  };
  for (int var = 0; var < 4; ++var) check_var(var);
}

TEST_CASE("expression: general power rule") {
  const auto e = Expression::parse("(1 + x1^2) ^ (x2)");
  const auto dx = e.derivative(0);
  const auto dy = e.derivative(1);
  const double x = 0.9, y = 1.7;
  CHECK(dx.eval(x, y, 0, 0) ==
        doctest::Approx(oracles::fd2([&](double s) { return e.eval(s, y, 0, 0); }, x))
            .epsilon(1e-7));
  CHECK(dy.eval(x, y, 0, 0) ==
        doctest::Approx(oracles::fd2([&](double s) { return e.eval(x, s, 0, 0); }, y))
            .epsilon(1e-7));
}

TEST_CASE("expression: constant folding and dependence tracking") {
  double v = 0.0;
  CHECK(Expression::parse("2 * 3 + sin(0)").is_constant(&v));
  CHECK(v == doctest::Approx(6.0));
  CHECK(Expression::parse("x1 * 0 + 5").is_constant(&v));
  CHECK(v == doctest::Approx(5.0));
  CHECK(Expression::parse("x2 + t").depends_on(3));
  CHECK_FALSE(Expression::parse("x2 + x3").depends_on(0));
  CHECK_FALSE(Expression::parse("x1 - x1 * 1").derivative(0).depends_on(0));
}

#include <cmath>
#include <random>

#include "doctest.h"
#include "vkfem/errors.hpp"
#include "vkfem/expression.hpp"
#include "vkfem/problem.hpp"

using namespace vkfem;

namespace {

std::size_t error_position(const char* text) {
  try {
    Expression::parse(text);
  } catch (const ParseError& e) {
    return e.position();
  }
  FAIL("expected a parse error for " << text);
  return 0;
}

}  // namespace

TEST_SUITE("expression") {
  TEST_CASE("preset-style expressions at the origin") {
    CHECK(Expression::parse("1 - 5*(x^2+y^2) + (x^2+y^2)^2")(0, 0) == 1.0);
    CHECK(Expression::parse("(x+3)^2*(x-3)^2*(y+3)^2*(y-3)^2")(0, 0) == 6561.0);
  }

  TEST_CASE("precedence and associativity") {
    CHECK(Expression::parse("-x^2")(2, 0) == -4.0);
    CHECK(Expression::parse("2^3^2")(0, 0) == 64.0);
    CHECK(Expression::parse("8/2/2")(0, 0) == 2.0);
    CHECK(Expression::parse("1-2-3")(0, 0) == -4.0);
    CHECK(Expression::parse("1+2*3")(0, 0) == 7.0);
    CHECK(Expression::parse("2*-y")(0, 3) == -6.0);
    CHECK(Expression::parse("--x")(5, 0) == 5.0);
    CHECK(Expression::parse(" x * y ")(3, 4) == 12.0);
    CHECK(Expression::parse("1.5e2")(0, 0) == 150.0);
  }

  TEST_CASE("functions") {
    CHECK(Expression::parse("abs(x)")(-2, 0) == 2.0);
    CHECK(Expression::parse("sqrt(x)")(9, 0) == 3.0);
    CHECK(Expression::parse("sin(x)+cos(y)")(0, 0) == 1.0);
    CHECK(Expression::parse("exp(x)")(1, 0) == doctest::Approx(std::exp(1.0)));
  }

  TEST_CASE("syntax errors carry positions") {
    CHECK(error_position("x +") == 3);
    CHECK(error_position("(x") == 2);
    CHECK(error_position("x $ y") == 2);
    CHECK(error_position("2 * foo(x)") == 4);
    CHECK(error_position("x^y") == 2);
    CHECK(error_position("") == 0);
    CHECK_THROWS_WITH(Expression::parse("z"), doctest::Contains("unknown identifier"));
  }

  TEST_CASE("printing then parsing is a fixed point") {
    for (const char* text : {"1 - 5*(x^2 + y^2) + (x^2 + y^2)^2", "-x^2*3/y", "sqrt(abs(x - 0.1)) + 2^3^2",
                             "1 - (x+0.25)^2/0.2^2 - y^2/0.35^2", "--x"}) {
      const Expression e = Expression::parse(text);
      const std::string printed = e.to_string();
      const Expression again = Expression::parse(printed);
      CHECK(again.to_string() == printed);
      CHECK(again(0.3, -0.7) == e(0.3, -0.7));
    }
  }

  TEST_CASE("polynomial degree") {
    CHECK(Expression::parse("(x+3)^2*(x-3)^2*(y+3)^2*(y-3)^2").polynomial_degree() == 8);
    CHECK(Expression::parse("1 - 5*(x^2+y^2) + (x^2+y^2)^2").polynomial_degree() == 4);
    CHECK(Expression::parse("x/2").polynomial_degree() == 1);
    CHECK(Expression::parse("1/x").polynomial_degree() == -1);
    CHECK(Expression::parse("sin(x)").polynomial_degree() == -1);
    CHECK(Expression::parse("sin(2)").polynomial_degree() == 0);
    CHECK(Expression::parse("0").is_zero());
    CHECK_FALSE(Expression::parse("0*x").is_zero());
  }

  TEST_CASE("presets match their closed forms") {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    const Problem p1 = preset_problem("example1");
    const Problem p2 = preset_problem("example2");
    const Problem p3 = preset_problem("example3");
    const Problem pl = preset_problem("lshape");
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-14 * std::max(1.0, std::abs(b)); };
    for (int k = 0; k < 100; ++k) {
      const double x = u(rng), y = u(rng);
      const double r2 = x * x + y * y;
      CHECK(close(p1.obstacle(x, y), 1 - 5 * r2 + r2 * r2));
      CHECK(close(p2.obstacle(x, y), 1 - 5 * r2 - r2 * r2));
      CHECK(close(p3.obstacle(x, y), 1 - 5 * r2 + r2 * r2));
      const double f = (x + 3) * (x + 3) * (x - 3) * (x - 3) * (y + 3) * (y + 3) * (y - 3) * (y - 3);
      CHECK(close(p3.load(x, y), f));
      CHECK(close(pl.obstacle(x, y), 1 - (x + 0.25) * (x + 0.25) / 0.04 - y * y / (0.35 * 0.35)));
    }
    CHECK(p1.load.is_zero());
    CHECK(pl.domain.kind == DomainKind::lshape);
    CHECK_THROWS_AS(preset_problem("example9"), ParseError);
  }
}

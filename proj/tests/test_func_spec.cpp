#include <cmath>
#include <numbers>

#include "doctest.h"
#include "memkernel/errors.hpp"
#include "memkernel/expr.hpp"
#include "memkernel/noise.hpp"

using namespace memkernel;

namespace {

// random tree of bounded depth over x, built from the public builders
Expr random_expr(Xorshift64Star& rng, int depth) {
  const double r = rng.uniform();
  if (depth == 0 || r < 0.2) {
    if (rng.uniform() < 0.5) return Expr::variable();
    return Expr::constant(std::round(8.0 * rng.uniform() - 4.0) / 2.0 + 0.25);
  }
  const int op = static_cast<int>(rng.uniform() * 8.0);
  const Expr a = random_expr(rng, depth - 1);
  switch (op) {
    case 0: return a + random_expr(rng, depth - 1);
    case 1: return a - random_expr(rng, depth - 1);
    case 2: return a * random_expr(rng, depth - 1);
    case 3: return a / (Expr::constant(2.0) + sin(random_expr(rng, depth - 1)));
    case 4: return sin(a);
    case 5: return cos(a);
    case 6: return exp(Expr::constant(0.3) * sin(a));
    default: return pow(a, 1 + static_cast<int>(rng.uniform() * 3.0));
  }
}

}  // namespace

TEST_CASE("parse builds the expected trees") {
  const Expr s = parse_expr("sin(3.141592653589793*x)");
  CHECK(s.kind() == Expr::Kind::Sin);
  CHECK(s.lhs().kind() == Expr::Kind::Mul);
  CHECK(s.eval(0.5) == doctest::Approx(1.0).epsilon(1e-15));

  const Expr b = parse_expr("x^3*(1-x)^3");
  CHECK(b.kind() == Expr::Kind::Mul);
  CHECK(b.lhs().kind() == Expr::Kind::Pow);
  CHECK(b.lhs().exponent() == 3);
  CHECK(b.rhs().kind() == Expr::Kind::Pow);

  CHECK(parse_expr("pi").eval(0.0) == std::numbers::pi);
  CHECK(parse_expr("-2^2").eval(0.0) == -4.0);
  CHECK(parse_expr("2*-x").eval(3.0) == -6.0);
  CHECK(parse_expr("1e-3*t", "t").eval(2.0) == doctest::Approx(2e-3));
}

TEST_CASE("parse rejects bad input with an offset") {
  CHECK_THROWS_AS(parse_expr("x^(1/2)"), ParseError);
  CHECK_THROWS_AS(parse_expr("x^1.5"), ParseError);
  CHECK_THROWS_AS(parse_expr("sin(x"), ParseError);
  CHECK_THROWS_AS(parse_expr("y+1"), ParseError);
  CHECK_THROWS_AS(parse_expr("tan(x)"), ParseError);
  CHECK_THROWS_AS(parse_expr(""), ParseError);
  CHECK_THROWS_AS(parse_expr("x x"), ParseError);
  try {
    parse_expr("1 + # 2");
    FAIL("no throw");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 4);
  }
}

TEST_CASE("evaluation") {
  CHECK(parse_expr("x^3*(1-x)^3").eval(0.5) == 0.015625);
  CHECK(parse_expr("sin(x)").eval(0.0) == 0.0);
  CHECK(parse_expr("exp(x)").eval(1.0) == doctest::Approx(std::exp(1.0)).epsilon(1e-15));
  CHECK(parse_expr("x^0").eval(5.0) == 1.0);
  CHECK(parse_expr("x^-2").eval(2.0) == 0.25);
  CHECK_THROWS_AS(parse_expr("1/x").eval(0.0), EvalError);
}

TEST_CASE("derivative rules") {
  const Expr d = parse_expr("x^3").derivative();
  for (double x : {-1.0, 0.3, 2.0}) CHECK(d.eval(x) == doctest::Approx(3.0 * x * x));
  const Expr c = parse_expr("sin(2.5*x)").derivative();
  for (double x : {-1.0, 0.3, 2.0}) CHECK(c.eval(x) == doctest::Approx(2.5 * std::cos(2.5 * x)));

  const Expr phi = parse_expr("x^3*(1-x)^3");
  for (int order = 1; order <= 2; ++order) {
    CHECK(std::abs(phi.derivative(order).eval(0.0)) < 1e-14);
    CHECK(std::abs(phi.derivative(order).eval(1.0)) < 1e-14);
  }
  // finite-difference oracle on eval
  const double h = 1e-6;
  for (double x : {0.0, 1.0}) {
    const double fd = (phi.eval(x + h) - phi.eval(x - h)) / (2.0 * h);
    CHECK(std::abs(fd) < 1e-6);
  }
  CHECK(parse_expr("5").derivative().is_constant());
  CHECK(!parse_expr("5*t", "t").derivative().depends_on_var());
}

TEST_CASE("derivative agrees with central differences on random trees") {
  Xorshift64Star rng(20240611);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Expr e = random_expr(rng, 4);
    const Expr d = e.derivative();
    for (double x : {-0.7, 0.2, 1.1}) {
      const double h = 1e-5;
      double fp, fm, dv;
      try {
        fp = e.eval(x + h);
        fm = e.eval(x - h);
        dv = d.eval(x);
      } catch (const EvalError&) {
        continue;
      }
      if (!std::isfinite(fp) || !std::isfinite(fm) || std::abs(dv) > 1e6) continue;
      const double fd = (fp - fm) / (2.0 * h);
      CHECK_MESSAGE(std::abs(fd - dv) <= 1e-5 * (1.0 + std::abs(dv)), e.str());
      ++checked;
    }
  }
  CHECK(checked > 250);
}

TEST_CASE("printing round-trips") {
  Xorshift64Star rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const Expr e = random_expr(rng, 4);
    const Expr back = parse_expr(e.str());
    CHECK_MESSAGE(back.structurally_equal(e), e.str());
    CHECK(back.str() == e.str());
  }
  const Expr t = parse_expr("0.1*cos(t)", "t");
  CHECK(parse_expr(t.str(), "t").structurally_equal(t));
}

TEST_CASE("polynomial coefficients") {
  const auto c = parse_expr("x^3*(1-x)^3").polynomial();
  REQUIRE(c.has_value());
  const std::vector<double> want = {0, 0, 0, 1, -3, 3, -1};
  REQUIRE(c->size() >= want.size());
  for (std::size_t i = 0; i < want.size(); ++i) CHECK((*c)[i] == doctest::Approx(want[i]));
  CHECK(!parse_expr("sin(x)").polynomial().has_value());
}

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "memkernel/errors.hpp"
#include "memkernel/expr.hpp"
#include "memkernel/grid.hpp"

using namespace memkernel;
using std::numbers::pi;

TEST_CASE("grid geometry") {
  const Grid g = Grid::make(2.0, 1.0, 9, 20);
  CHECK(g.nodes() == 11);
  CHECK(g.levels() == 21);
  CHECK(g.dx() == 0.2);
  CHECK(g.x(10) == 2.0);
  CHECK(g.t(20) == 1.0);
  CHECK_THROWS_AS(Grid::make(1.0, 1.0, 0, 10), ConfigError);
  CHECK_THROWS_AS(Grid::make(-1.0, 1.0, 10, 10), ConfigError);
}

TEST_CASE("second difference") {
  const Grid g = Grid::make(1.0, 1.0, 20, 10);
  const SpaceRow lin = sample_row(parse_expr("3*x - 1"), g);
  const SpaceRow quad = sample_row(parse_expr("x^2"), g);
  const SpaceRow dl = second_diff(lin, g.dx()), dq = second_diff(quad, g.dx());
  for (int i = 0; i < g.nodes(); ++i) {
    CHECK(std::abs(dl[i]) < 1e-9);
    CHECK(dq[i] == doctest::Approx(2.0).epsilon(1e-9));
  }

  const Grid h = Grid::make(1.0, 1.0, 199, 10);
  const SpaceRow s = sample_row(parse_expr("sin(pi*x)"), h);
  const SpaceRow d = second_diff(s, h.dx());
  double err = 0.0;
  for (int i = 1; i + 1 < h.nodes(); ++i) err = std::max(err, std::abs(d[i] + pi * pi * s[i]));
  const double bound = std::pow(pi, 4) / 12.0 * h.dx() * h.dx();
  CHECK(err <= bound);
  CHECK(err >= 0.5 * bound);
}

TEST_CASE("first difference is exact for quadratics") {
  const Grid g = Grid::make(1.0, 1.0, 10, 10);
  const SpaceRow d = first_diff(sample_row(parse_expr("x^2 + x"), g), g.dx());
  for (int i = 0; i < g.nodes(); ++i) CHECK(d[i] == doctest::Approx(2.0 * g.x(i) + 1.0));
}

TEST_CASE("helmholtz solve") {
  const Grid g = Grid::make(1.0, 1.0, 63, 10);
  const SpaceRow rhs = sample_row(parse_expr("sin(pi*x)"), g);

  const SpaceRow id = helmholtz_solve(0.0, rhs, 0.3, -0.2, g.dx());
  CHECK(id.front() == 0.3);
  CHECK(id.back() == -0.2);
  for (int i = 1; i + 1 < g.nodes(); ++i) CHECK(id[i] == doctest::Approx(rhs[i]));

  const double beta = 0.1, dx = g.dx();
  const double lam = 1.0 + beta * (2.0 - 2.0 * std::cos(pi * dx)) / (dx * dx);
  const SpaceRow w = helmholtz_solve(beta, rhs, 0.0, 0.0, dx);
  for (int i = 1; i + 1 < g.nodes(); ++i) CHECK(w[i] == doctest::Approx(rhs[i] / lam).epsilon(1e-12));

  const SpaceRow z = helmholtz_solve(beta, SpaceRow(g.nodes(), 0.0), 0.0, 0.0, dx);
  for (double v : z) CHECK(v == 0.0);

  HelmholtzSolver hs(beta, g.nx, dx);
  SpaceRow out(g.nodes());
  hs.solve(rhs, 0.0, 0.0, out);
  for (int i = 0; i < g.nodes(); ++i) CHECK(out[i] == doctest::Approx(w[i]).epsilon(1e-14));
}

TEST_CASE("trapezoid quadrature") {
  const Grid g = Grid::make(1.0, 1.0, 98, 10);  // 100 nodes, dx = 1/99
  CHECK(quad_trapz(SpaceRow(g.nodes(), 1.0), g.dx()) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(quad_trapz(sample_row(parse_expr("x"), g), g.dx()) == doctest::Approx(0.5).epsilon(1e-14));
  const double dx = g.dx();
  CHECK(quad_trapz(sample_row(parse_expr("x^2"), g), dx) ==
        doctest::Approx(1.0 / 3.0 + dx * dx / 6.0).epsilon(1e-13));
  const SpaceRow a = sample_row(parse_expr("x"), g);
  CHECK(dot_trapz(a, a, dx) == doctest::Approx(1.0 / 3.0 + dx * dx / 6.0).epsilon(1e-13));
}

TEST_CASE("field rows") {
  Field f(3, 4, 1.5);
  CHECK(f.rows() == 3);
  CHECK(f.cols() == 4);
  const std::vector<double> r = {1, 2, 3, 4};
  f.set_row(1, r);
  CHECK(f(1, 2) == 3.0);
  CHECK(f(2, 3) == 1.5);
}

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "memkernel/direct.hpp"
#include "memkernel/equivalence.hpp"
#include "memkernel/errors.hpp"
#include "oracles.hpp"

using namespace memkernel;
using std::numbers::pi;

TEST_CASE("psi") {
  const ProblemData pd = oracles::twin_problem(99, 10);
  const SpaceRow psi = psi_row(pd);
  CHECK(psi.back() == doctest::Approx(1.0 / 140.0).epsilon(1e-13));
  const SpaceRow pq = psi_row(pd, PsiMethod::Quadrature);
  for (std::size_t i = 0; i < psi.size(); ++i) CHECK(pq[i] == doctest::Approx(psi[i]).epsilon(1e-10));
}

TEST_CASE("alpha against dense quadrature") {
  ProblemData pd = oracles::twin_problem(400, 10);
  const Expr p1 = pd.phi.derivative();
  {
    const EquivSetup s = build_setup(pd, parse_expr("0", "t"), SetupOptions{.strict = false});
    const double want = -(pi * pi / 4.0) *
                        quad_gauss([&](double x) { return p1.eval(x) * std::sin(0.5 * pi * x); }, 0.0, 1.0, 25000);
    CHECK(s.alpha_inv == doctest::Approx(want).epsilon(1e-5));
    CHECK(!s.alpha_degenerate);
  }
  // phi' is odd about 1/2 and sin(pi x) even, so the pairing vanishes
  pd.u0 = parse_expr("sin(pi*x)");
  const double want = -pi * pi * quad_gauss([&](double x) { return p1.eval(x) * std::sin(pi * x); }, 0.0, 1.0, 25000);
  CHECK(std::abs(want) < 1e-12);
  const EquivSetup s = build_setup(pd, parse_expr("0", "t"), SetupOptions{.strict = false});
  CHECK(std::abs(s.alpha_inv - want) < 1e-10);
  CHECK(s.alpha_degenerate);
  CHECK_THROWS_AS(build_setup(pd, parse_expr("0", "t")), AlphaDegenerate);
}

TEST_CASE("zero velocity gives zero shifted velocity") {
  ProblemData pd = oracles::twin_problem(50, 10);
  pd.u1 = parse_expr("0");
  const EquivSetup s = build_setup(pd, parse_expr("0", "t"), SetupOptions{.strict = false});
  for (double v : s.v0) CHECK(v == 0.0);
}

TEST_CASE("compatibility of twin data") {
  const ProblemData pd = oracles::twin_problem(100, 200);
  const Expr k = parse_expr("0.5*exp(-t)", "t");
  const EquivSetup s = build_setup(pd, synthesize_f(pd, k));
  const CompatibilityReport rep = check_compatibility(pd, s, k.eval(0.0));
  for (const auto& l : rep.lines) CHECK_MESSAGE(l.pass, l.name << " " << l.value);
  REQUIRE(rep.find("i4_j0") != nullptr);
  CHECK(rep.find("nope") == nullptr);
  CHECK(rep.lines.size() == 10);
  CHECK(s.k0 == doctest::Approx(0.5).epsilon(1e-2));
}

TEST_CASE("compatibility failures") {
  const ProblemData pd = oracles::twin_problem(100, 200);
  const EquivSetup s = build_setup(pd, parse_expr("0", "t"), SetupOptions{.strict = false});
  const CompatibilityReport rep = check_compatibility(pd, s);
  CHECK(!rep.find("i4_j0")->pass);
  CHECK(!rep.all_pass());

  ProblemData z = pd;
  z.u0 = parse_expr("0");
  z.u1 = parse_expr("0");
  const EquivSetup sz = build_setup(z, parse_expr("0", "t"), SetupOptions{.strict = false});
  for (const auto& l : check_compatibility(z, sz).lines) CHECK(std::abs(l.value) == 0.0);

  ProblemData bad = pd;
  bad.phi = parse_expr("x^2*(1-x)^3");
  const EquivSetup sb = build_setup(bad, parse_expr("0", "t"), SetupOptions{.strict = false});
  const CompatibilityReport rb = check_compatibility(bad, sb);
  CHECK(!rb.find("i1_phi_xx_0")->pass);
  CHECK(rb.find("i1_phi_0")->pass);
}

TEST_CASE("G operator") {
  ProblemData pd = oracles::twin_problem(400, 10);
  const EquivSetup s = build_setup(pd, parse_expr("0", "t"), SetupOptions{.strict = false});
  const SpaceRow zero(pd.grid.nodes(), 0.0);
  CHECK(G_apply(s, zero, 0.0) == 0.0);
  CHECK(G_apply(s, zero, 2.0) == doctest::Approx(280.0).epsilon(1e-12));
  const SpaceRow p2 = sample_row(pd.phi.derivative(2), pd.grid);
  const Expr pp2 = pd.phi.derivative(2), pp1 = pd.phi.derivative();
  const double num = quad_gauss(
      [&](double x) {
        const double a = x * x * x * x * (0.25 - 0.6 * x + 0.5 * x * x - x * x * x / 7.0);
        return (a - 0.1 * pp1.eval(x)) * pp2.eval(x);
      },
      0.0, 1.0, 400);
  CHECK(G_apply(s, p2, 0.0) == doctest::Approx(num * 140.0).epsilon(1e-4));
}

TEST_CASE("velocity transform round trip") {
  const ProblemData pd = oracles::twin_problem(40, 400);
  const Grid& g = pd.grid;
  const SpaceRow u0 = sample_row(pd.u0, g);
  {
    const Field u = u_from_v(g, Field(g.levels(), g.nodes()), TimeSeries{std::vector<double>(g.levels()), g.dt()}, u0);
    for (int n = 0; n < g.levels(); ++n)
      for (int i = 0; i < g.nodes(); ++i) CHECK(u(n, i) == u0[i]);
  }
  {
    TimeSeries z = sample_series(parse_expr("sin(3*t)", "t"), g);
    Field v(g.levels(), g.nodes());
    for (int n = 0; n < g.levels(); ++n)
      for (int i = 0; i < g.nodes(); ++i) v(n, i) = z[n] * g.x(i) / g.ell;
    const Field u = u_from_v(g, v, z, u0);
    for (int n = 0; n < g.levels(); ++n)
      for (int i = 0; i < g.nodes(); ++i) CHECK(u(n, i) == doctest::Approx(u0[i]).epsilon(1e-14));
  }
  double prev = 0.0;
  for (int lev = 0; lev < 2; ++lev) {
    const ProblemData q = oracles::twin_problem(40, 100 << lev);
    const DirectSolution sol = solve_direct(q, Kernel::from_expr(parse_expr("0.4*cos(2*t)", "t"), q.grid));
    const VTransform vt = v_from_u(q, sol.u, sol.y, sol.yprime);
    // v vanishes at both ends once the boundary relation has been stepped
    for (int n = 2; n + 1 < q.grid.levels(); ++n) {
      CHECK(std::abs(vt.v(n, 0)) < 1e-12);
      CHECK(std::abs(vt.v(n, q.grid.nodes() - 1)) < 1e-10);
    }
    const Field back = u_from_v(q.grid, vt.v, vt.z, sample_row(q.u0, q.grid));
    double e = 0.0;
    for (std::size_t n = 0; n < back.rows(); ++n)
      for (std::size_t i = 0; i < back.cols(); ++i) e = std::max(e, std::abs(back(n, i) - sol.u(n, i)));
    CHECK(e < 1e-3);
    if (lev > 0) CHECK(prev / e > 3.0);
    prev = e;
  }
}

TEST_CASE("equivalence residual shrinks") {
  double prev = 0.0;
  for (int lev = 0; lev < 2; ++lev) {
    const ProblemData pd = oracles::twin_problem(25 << lev, 50 << lev);
    const Kernel k = Kernel::from_expr(parse_expr("0.4*cos(2*t)", "t"), pd.grid);
    const DirectSolution sol = solve_direct(pd, k);
    const VTransform vt = v_from_u(pd, sol.u, sol.y, sol.yprime);
    const double r = equivalence_residual(pd, k, vt.v, vt.z);
    if (lev > 0) CHECK(std::log2(prev / r) > 1.5);
    prev = r;
  }
}

TEST_CASE("k(0) formula variants differ") {
  const ProblemData pd = oracles::twin_problem(50, 100);
  const TimeSeries f = synthesize_f(pd, parse_expr("0.5*exp(-t)", "t"));
  const EquivSetup a = build_setup(pd, f);
  const EquivSetup b = build_setup(pd, f, SetupOptions{.k0_formula = K0Formula::AsPrinted});
  CHECK(a.k0 == doctest::Approx(0.5).epsilon(1e-2));
  CHECK(std::abs(b.k0 - 0.5) > 0.1);
}

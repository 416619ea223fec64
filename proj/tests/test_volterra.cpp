#include <cmath>

#include "doctest.h"
#include "memkernel/expr.hpp"
#include "memkernel/grid.hpp"
#include "memkernel/volterra.hpp"
#include "oracles.hpp"

using namespace memkernel;

namespace {

TimeSeries series(const char* e, int nt, double T = 1.0) {
  return sample_series(parse_expr(e, "t"), Grid::make(1.0, T, 4, nt));
}

}  // namespace

TEST_CASE("trapezoid convolution") {
  const int nt = 40;
  const TimeSeries zero = series("0", nt), one = series("1", nt), t = series("t", nt);
  for (double v : conv(zero, t).values) CHECK(v == 0.0);
  const TimeSeries c1 = conv(one, one), ct = conv(t, one);
  for (int n = 0; n <= nt; ++n) {
    const double tn = n * one.dt;
    CHECK(c1[n] == doctest::Approx(tn).epsilon(1e-13));
    CHECK(ct[n] == doctest::Approx(0.5 * tn * tn).epsilon(1e-13));
    CHECK(conv_at(t, one, n) == ct[n]);
  }
}

TEST_CASE("column-wise convolution") {
  const int nt = 30;
  const Grid g = Grid::make(1.0, 1.0, 6, nt);
  const TimeSeries k = series("exp(-t)", nt);
  Field F(g.levels(), g.nodes());
  for (int n = 0; n < g.levels(); ++n)
    for (int i = 0; i < g.nodes(); ++i) F(n, i) = std::sin(1.0 + g.x(i));
  const Field c = conv_field(k, F);
  const TimeSeries one = series("1", nt);
  const TimeSeries ik = conv(k, one);
  for (int n = 0; n < g.levels(); ++n)
    for (int i = 0; i < g.nodes(); ++i) CHECK(c(n, i) == doctest::Approx(F(0, i) * ik[n]).epsilon(1e-13));
  for (double v : conv_field(series("0", nt), F).data()) CHECK(v == 0.0);
  for (double v : conv_field(k, Field(g.levels(), g.nodes())).data()) CHECK(v == 0.0);
}

TEST_CASE("prefix integral") {
  const int nt = 50;
  for (double v : integrate_prefix(series("0", nt), 2.0).values) CHECK(v == 2.0);
  const TimeSeries one = integrate_prefix(series("1", nt), 0.0);
  for (int n = 0; n <= nt; ++n) CHECK(one[n] == doctest::Approx(n * one.dt).epsilon(1e-13));
  const TimeSeries s = integrate_prefix(series("cos(t)", nt), 0.0);
  for (int n = 0; n <= nt; ++n) {
    const double tn = n * s.dt;
    CHECK(std::abs(s[n] - std::sin(tn)) <= s.dt * s.dt / 12.0 * tn + 1e-15);
  }
}

TEST_CASE("L2 time norm") {
  CHECK(l2_time_norm(series("0", 10)) == 0.0);
  CHECK(l2_time_norm(series("1", 10)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(l2_time_norm(series("t", 1000)) - 1.0 / std::sqrt(3.0)) < 1e-5);
  // partial horizon
  const TimeSeries t = series("t", 1000);
  CHECK(std::abs(l2_time_norm(t, 500) - std::sqrt(0.125 / 3.0)) < 1e-5);
}

TEST_CASE("Young convolution margin") {
  CHECK(check_young(series("0", 100), series("t", 100)) == 0.0);
  CHECK(check_young(series("1", 1000), series("1", 1000)) == doctest::Approx(1.0 - 1.0 / std::sqrt(3.0)).epsilon(1e-5));
  Xorshift64Star rng(5);
  for (int c = 0; c < 20; ++c) {
    const TimeSeries k = oracles::random_series(rng, 200, 1.0), g = oracles::random_series(rng, 200, 1.0);
    CHECK(check_young(k, g) >= -1e-8);
  }
}

TEST_CASE("zero-start bounds") {
  const TimeSeries w = series("sin(3*t) + t^2", 400);
  const ZeroStartMargins m = check_zero_start(w);
  CHECK(m.sup_margin >= 0.0);
  CHECK(m.l2_margin >= 0.0);
  CHECK_THROWS(check_zero_start(series("1 + t", 100)));
}

TEST_CASE("finite-difference derivatives of series") {
  const TimeSeries s = series("sin(2*t)", 200);
  const TimeSeries d1 = fd_derivative(s);
  for (std::size_t n = 0; n < s.size(); ++n) CHECK(std::abs(d1[n] - 2.0 * std::cos(2.0 * n * s.dt)) < 1e-3);
  for (int d = 1; d <= 4; ++d) {
    const TimeSeries dd = derivative_series(s, d);
    const Expr ex = parse_expr("sin(2*t)", "t").derivative(d);
    double err = 0.0;
    for (std::size_t n = 0; n < s.size(); ++n) err = std::max(err, std::abs(dd[n] - ex.eval(n * s.dt)));
    CHECK_MESSAGE(err < 1e-4 * std::pow(2.0, d), "order " << d);
  }
  // stride grows on fine grids for high derivatives only
  CHECK(derivative_stride(4, 101, 1e-2) == 1);
  CHECK(derivative_stride(4, 100001, 1e-5) > derivative_stride(1, 100001, 1e-5));
}

TEST_CASE("Fornberg weights") {
  const std::vector<double> x = {-1.0, 0.0, 1.0};
  const auto w = fornberg_weights(0.0, x, 2);
  CHECK(w[1][0] == doctest::Approx(-0.5));
  CHECK(w[1][2] == doctest::Approx(0.5));
  CHECK(w[2][0] == doctest::Approx(1.0));
  CHECK(w[2][1] == doctest::Approx(-2.0));
}

TEST_CASE("Savitzky-Golay keeps cubics") {
  const TimeSeries s = series("1 - 2*t + t^3", 100);
  const TimeSeries sm = savgol_smooth(s, 9);
  for (std::size_t n = 0; n < s.size(); ++n) CHECK(sm[n] == doctest::Approx(s[n]).epsilon(1e-10));
}

TEST_CASE("kernel from its derivative") {
  const Grid g = Grid::make(1.0, 1.0, 4, 100);
  const Kernel k = Kernel::from_kprime(sample_series(parse_expr("-exp(-t)", "t"), g), 1.0);
  CHECK(k.k0 == 1.0);
  CHECK(k.k[100] == doctest::Approx(std::exp(-1.0)).epsilon(1e-5));
  const Kernel z = Kernel::zero(g);
  CHECK(z.k.size() == 101);
  const Kernel e = Kernel::from_expr(parse_expr("0.4*cos(2*t)", "t"), g);
  CHECK(e.k0 == 0.4);
  CHECK(e.kprime[50] == doctest::Approx(-0.8 * std::sin(1.0)));
}

#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "memkernel/expr.hpp"
#include "memkernel/grid.hpp"

namespace memkernel {

struct TimeSeries {
  std::vector<double> values;
  double dt = 0.0;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t n) const { return values[n]; }
  double& operator[](std::size_t n) { return values[n]; }
  double horizon() const { return dt * static_cast<double>(values.empty() ? 0 : values.size() - 1); }
};

TimeSeries sample_series(const Expr& e, const Grid& g);

// Memory kernel on the time grid; k is always the trapezoid prefix
// integral of kprime started at k0.
struct Kernel {
  TimeSeries k;
  TimeSeries kprime;
  double k0 = 0.0;

  static Kernel from_kprime(const TimeSeries& kprime, double k0);
  static Kernel from_expr(const Expr& k, const Grid& g);
  static Kernel zero(const Grid& g);
};

// Trapezoid convolution (k*g)(t_n) = int_0^{t_n} k(t_n - s) g(s) ds.
TimeSeries conv(const TimeSeries& k, const TimeSeries& g);
double conv_at(const TimeSeries& k, const TimeSeries& g, std::size_t n);

// Column-wise convolution of every space node of F (rows = time levels).
Field conv_field(const TimeSeries& k, const Field& F);

TimeSeries integrate_prefix(const TimeSeries& s, double s0);

// Discrete L2(0, t_upto) norm by the trapezoid rule.
double l2_time_norm(const TimeSeries& s, std::size_t upto);
double l2_time_norm(const TimeSeries& s);

// tau^{1/2} ||k|| ||g|| - ||k*g|| on the common horizon.
double check_young(const TimeSeries& k, const TimeSeries& g);

struct ZeroStartMargins {
  double sup_margin;  // tau^{1/2} ||w_t|| + slack - sup|w|
  double l2_margin;   // tau ||w_t|| + slack - ||w||
};
// Requires w[0] == 0; slack = slack_factor * dt * ||w_t||.
ZeroStartMargins check_zero_start(const TimeSeries& w, double slack_factor = 10.0);

// Second-order first derivative of a series (one-sided at the ends).
TimeSeries fd_derivative(const TimeSeries& s);

// Fourth-order finite-difference estimate of the d-th derivative on every
// stride-th sample. stride 0 picks the step balancing rounding against
// truncation, which matters for d >= 3 on fine grids.
TimeSeries derivative_series(const TimeSeries& s, int d, int stride = 0);
int derivative_stride(int d, int length, double dt);

// Savitzky-Golay smoothing: local cubic least-squares fit over an odd window.
TimeSeries savgol_smooth(const TimeSeries& s, int window);

// Finite-difference weights for derivatives 0..m at z over nodes x.
std::vector<std::vector<double>> fornberg_weights(double z, std::span<const double> x, int m);

TimeSeries read_series(const std::filesystem::path& path);
void write_series(const std::filesystem::path& path, const TimeSeries& s);

}  // namespace memkernel

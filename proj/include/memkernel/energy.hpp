#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "memkernel/grid.hpp"

namespace memkernel {

// Discrete H^2 surrogate of one row: sqrt(|w|^2 + |w_x|^2 + |w_xx|^2).
double h2_row_norm(std::span<const double> w, double dx);

// Time derivatives of order 0..2 of the rows of w, second order, with
// one-sided stencils at the first and last rows.
Field time_derivative(const Field& w, int order, double dt);

// sum_{j=0..2} || d_t^j w ||_{L2(0,tau; H2)}
double h2_time_norm(const Field& w, double dx, double dt);

struct EnergyTrack {
  std::vector<double> t;
  std::vector<double> E1, E2;
  std::vector<double> cum_vtt, cum_vxtt, cum_vxxtt;  // int_0^t of squared norms

  void write(const std::filesystem::path& path) const;
};

// E1 = (|v_t|^2 + |v_x|^2 + beta |v_xt|^2)/2,
// E2 = (|v_xt|^2 + |v_xx|^2 + beta |v_xxt|^2)/2.
EnergyTrack energy_series(const Field& v, double beta, const Grid& g);

// Calibrated constant of the discrete a-priori estimate: 1.2 times the
// largest ratio ||v|| / data over the 20 seeded cases of the calibration
// suite (beta = 0.1, ell = T = 1, nx = 50, nt = 100). The calibration test
// reproduces it.
inline constexpr double kEstimateConstant = 18.063281446798168;

// C (|v0|_H2 + |v1|_H2 + |K|_{L2 L2}) - h2_time_norm(v); >= 0 when the
// estimate holds.
double check_estimate(const Field& v, std::span<const double> v0, std::span<const double> v1,
                      const Field& K, const Grid& g, double C = kEstimateConstant);

// Right-hand side data norm |v0|_H2 + |v1|_H2 + |K|_{L2 L2}.
double estimate_data_norm(std::span<const double> v0, std::span<const double> v1, const Field& K,
                          const Grid& g);

}  // namespace memkernel

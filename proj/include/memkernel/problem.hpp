#pragma once

#include "memkernel/expr.hpp"
#include "memkernel/grid.hpp"

namespace memkernel {

// Physical parameters and data of the boundary value problem
//   u_tt - u_xx - beta u_xxtt + k*u_xx = 0 on (0, ell),
//   u(0) = 0,  u_x(ell) - k*u_x(ell) = y',  u_t(ell) = -(p y' + q y).
struct ProblemData {
  double beta = 0.1;
  double p = 1.0;
  double q = 1.0;
  Grid grid;
  Expr u0, u1, phi;  // functions of x

  // Throws ConfigError / BoundaryIncompatible.
  void validate() const;

  double ell() const { return grid.ell; }
};

// Samples of data functions and their x-derivatives on the grid.
struct DataRows {
  SpaceRow x;
  SpaceRow u0, u0x, u0xx;
  SpaceRow u1, u1x, u1xx;
  SpaceRow phi, phi1, phi2, phi3;
};

DataRows sample_data(const ProblemData& pd);

}  // namespace memkernel

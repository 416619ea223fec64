#include "memkernel/problem.hpp"

#include <cmath>

#include "memkernel/errors.hpp"
#include "memkernel/io.hpp"

namespace memkernel {

void ProblemData::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be positive");
  if (!(p > 0.0) || !std::isfinite(p)) throw ConfigError("p must be positive");
  if (!(q > 0.0) || !std::isfinite(q)) throw ConfigError("q must be positive");
  Grid::make(grid.ell, grid.T, grid.nx, grid.nt);
  const double a = u0.eval(0.0);
  if (std::abs(a) > 1e-10) throw BoundaryIncompatible("u0(0) = " + format_double(a) + " must vanish");
}

DataRows sample_data(const ProblemData& pd) {
  DataRows r;
  r.x = pd.grid.x_nodes();
  const Expr du0 = pd.u0.derivative();
  const Expr du1 = pd.u1.derivative();
  const Expr d1 = pd.phi.derivative();
  const Expr d2 = d1.derivative();
  r.u0 = sample_row(pd.u0, pd.grid);
  r.u0x = sample_row(du0, pd.grid);
  r.u0xx = sample_row(du0.derivative(), pd.grid);
  r.u1 = sample_row(pd.u1, pd.grid);
  r.u1x = sample_row(du1, pd.grid);
  r.u1xx = sample_row(du1.derivative(), pd.grid);
  r.phi = sample_row(pd.phi, pd.grid);
  r.phi1 = sample_row(d1, pd.grid);
  r.phi2 = sample_row(d2, pd.grid);
  r.phi3 = sample_row(d2.derivative(), pd.grid);
  return r;
}

}  // namespace memkernel

#pragma once

#include <span>
#include <vector>

#include "memkernel/expr.hpp"
#include "memkernel/grid.hpp"
#include "memkernel/problem.hpp"
#include "memkernel/volterra.hpp"

namespace memkernel {

// Optional manufactured forcing. interior is added to the right side of
// the interior equation, flux to y' in the flux relation
// (u_x - k*u_x = y' + flux) and ode to the boundary velocity
// (u_t = -(p y' + q y) + ode). Empty members mean zero.
struct DirectForcing {
  Field interior;
  TimeSeries flux;
  TimeSeries ode;
};

struct DirectSolution {
  Field u;
  TimeSeries y, yprime, f;
};

DirectSolution solve_direct(const ProblemData& pd, const Kernel& k,
                            const DirectForcing* forcing = nullptr);

enum class SynthRefine { None, Richardson };

// Measurement of the direct solution for a known kernel k(t). Richardson
// also solves on the grid of half the spacing and cancels the leading
// O(dx^2) term, so the data are not tied to the spatial scheme the
// inverse solver uses.
TimeSeries synthesize_f(const ProblemData& pd, const Expr& k_true,
                        SynthRefine refine = SynthRefine::Richardson);

// f(t) = -int (phi' - beta phi''') u dx.
TimeSeries overdetermination(const ProblemData& pd, const Field& u);
// f(t) = int (phi - beta phi'') u_x dx with a discrete u_x.
TimeSeries overdetermination_flux_form(const ProblemData& pd, const Field& u);

// Leapfrog for w_tt - w_xx - beta w_xxtt = K with homogeneous Dirichlet
// ends, implicit in the dispersive term.
class DirichletStepper {
 public:
  DirichletStepper(const Grid& g, double beta);
  // w^{n+1} = 2 w^n - w^{n-1} + dt^2 (I - beta D)^{-1} (D w^n + K^n)
  void step(std::span<const double> prev, std::span<const double> curr, std::span<const double> K,
            std::span<double> next) const;
  // w^1 = w0 + dt w1 + dt^2/2 (I - beta D)^{-1} (D w0 + K^0)
  void start(std::span<const double> w0, std::span<const double> w1, std::span<const double> K0,
             std::span<double> next) const;

 private:
  Grid g_;
  HelmholtzSolver h_;
  mutable SpaceRow rhs_, acc_;
};

Field solve_linear_dirichlet(const Grid& g, double beta, std::span<const double> v0,
                             std::span<const double> v1, const Field& K);

}  // namespace memkernel

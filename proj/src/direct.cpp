#include "memkernel/direct.hpp"

#include <cmath>

#include "memkernel/equivalence.hpp"
#include "memkernel/errors.hpp"

namespace memkernel {

namespace {

double one_sided_rate(const TimeSeries& s) {
  return (-3.0 * s[0] + 4.0 * s[1] - s[2]) / (2.0 * s.dt);
}

double boundary_slope(std::span<const double> u, double dx) {
  const std::size_t m = u.size();
  return (3.0 * u[m - 1] - 4.0 * u[m - 2] + u[m - 3]) / (2.0 * dx);
}

void interior_second_diff(std::span<const double> u, double dx, std::span<double> out) {
  const std::size_t m = u.size();
  const double h2 = 1.0 / (dx * dx);
  out[0] = 0.0;
  out[m - 1] = 0.0;
  for (std::size_t i = 1; i + 1 < m; ++i) out[i] = (u[i - 1] - 2.0 * u[i] + u[i + 1]) * h2;
}

}  // namespace

DirectSolution solve_direct(const ProblemData& pd, const Kernel& k, const DirectForcing* forcing) {
  pd.validate();
  const Grid& g = pd.grid;
  const int M = g.nodes();
  const int N = g.nx;
  const int NT = g.nt;
  const double dx = g.dx(), dt = g.dt();
  if (static_cast<int>(k.k.size()) != g.levels()) throw ShapeError("kernel length does not match nt+1");

  const bool has_int = forcing && forcing->interior.rows() > 0;
  const bool has_flux = forcing && forcing->flux.size() > 0;
  const bool has_ode = forcing && forcing->ode.size() > 0;
  if (has_int && (static_cast<int>(forcing->interior.rows()) != g.levels() ||
                  static_cast<int>(forcing->interior.cols()) != M))
    throw ShapeError("interior forcing shape");
  if (has_flux && static_cast<int>(forcing->flux.size()) != g.levels()) throw ShapeError("flux forcing length");
  if (has_ode && static_cast<int>(forcing->ode.size()) != g.levels()) throw ShapeError("ode forcing length");
  auto gflux = [&](int n) { return has_flux ? forcing->flux[n] : 0.0; };
  auto gode = [&](int n) { return has_ode ? forcing->ode[n] : 0.0; };

  const DataRows rows = sample_data(pd);
  BoundaryStart bs;
  if (has_flux) {
    bs.gflux0 = forcing->flux[0];
    bs.gflux_dot0 = one_sided_rate(forcing->flux);
  }
  if (has_ode) {
    bs.gode0 = forcing->ode[0];
    bs.gode_dot0 = one_sided_rate(forcing->ode);
  }
  if (has_int) bs.interior0.assign(forcing->interior.row(0).begin(), forcing->interior.row(0).end());
  const DirectStart st = direct_start(pd, rows, k.k0, &bs);

  DirectSolution sol;
  sol.u = Field(g.levels(), M);
  sol.y = TimeSeries{std::vector<double>(g.levels()), dt};
  sol.yprime = TimeSeries{std::vector<double>(g.levels()), dt};
  Field& u = sol.u;

  u.set_row(0, rows.u0);
  u(0, 0) = 0.0;
  for (int i = 0; i < M; ++i) u(1, i) = rows.u0[i] + dt * rows.u1[i] + 0.5 * dt * dt * st.u2[i];
  u(1, 0) = 0.0;
  sol.y[0] = st.y0;
  sol.yprime[0] = st.yp0;
  sol.y[1] = st.y0 + dt * st.yp0 + 0.5 * dt * dt * st.ypp0;
  {
    const double ut1 = rows.u1.back() + dt * st.u2.back();
    sol.yprime[1] = (gode(1) - ut1 - pd.q * sol.y[1]) / pd.p;
  }

  std::vector<double> ux(g.levels(), 0.0);
  ux[0] = boundary_slope(u.row(0), dx);
  ux[1] = boundary_slope(u.row(1), dx);
  Field Du(g.levels(), M);
  interior_second_diff(u.row(0), dx, Du.row(0));
  interior_second_diff(u.row(1), dx, Du.row(1));

  HelmholtzSolver hs(pd.beta, N, dx);
  SpaceRow zero(M, 0.0), w(M), rhs(M), ahom(M), base(M);
  hs.solve(zero, 0.0, 1.0, w);

  const double lambda = 1.0 - 0.5 * dt * k.k[0];
  const double sigma1 = boundary_slope(w, dx);

  for (int n = 1; n < NT; ++n) {
    // memory term (k * D u)^n at interior nodes
    auto dn = Du.row(n), d0 = Du.row(0);
    for (int i = 0; i < M; ++i) rhs[i] = 0.5 * (k.k[n] * d0[i] + k.k[0] * dn[i]);
    for (int m = 1; m < n; ++m) {
      const double km = k.k[n - m];
      auto dm = Du.row(m);
      for (int i = 0; i < M; ++i) rhs[i] += km * dm[i];
    }
    for (int i = 0; i < M; ++i) rhs[i] = dn[i] - dt * rhs[i];
    if (has_int)
      for (int i = 0; i < M; ++i) rhs[i] += forcing->interior(n, i);
    hs.solve(rhs, 0.0, 0.0, ahom);

    const double Un = u(n, M - 1), Um = u(n - 1, M - 1);
    for (int i = 0; i < M; ++i)
      base[i] = 2.0 * u(n, i) - u(n - 1, i) + dt * dt * ahom[i] - (2.0 * Un - Um) * w[i];
    base[M - 1] = 0.0;
    const double sigma0 = boundary_slope(base, dx);

    double H = 0.5 * k.k[n + 1] * ux[0];
    for (int m = 1; m <= n; ++m) H += k.k[n + 1 - m] * ux[m];
    H *= dt;

    // unknowns (U, Y) = (u^{n+1}(ell), y^{n+1})
    const double a11 = lambda * sigma1 + 3.0 / (2.0 * dt * pd.p);
    const double a12 = pd.q / pd.p;
    const double b1 = H + gflux(n + 1) - lambda * sigma0 + (gode(n + 1) + (4.0 * Un - Um) / (2.0 * dt)) / pd.p;
    const double a21 = 1.0;
    const double a22 = pd.p + 0.5 * pd.q * dt;
    const double b2 = Un + (pd.p - 0.5 * pd.q * dt) * sol.y[n] + 0.5 * dt * (gode(n + 1) + gode(n));
    const double det = a11 * a22 - a12 * a21;
    if (!(std::abs(det) > 1e-14 * (std::abs(a11 * a22) + std::abs(a12 * a21))))
      throw SingularBoundary("boundary closure is singular at step " + std::to_string(n + 1));
    const double U = (b1 * a22 - a12 * b2) / det;
    const double Y = (a11 * b2 - a21 * b1) / det;

    auto un1 = u.row(n + 1);
    for (int i = 0; i < M; ++i) un1[i] = base[i] + U * w[i];
    un1[0] = 0.0;
    un1[M - 1] = U;
    sol.y[n + 1] = Y;
    const double ut = (3.0 * U - 4.0 * Un + Um) / (2.0 * dt);
    sol.yprime[n + 1] = (gode(n + 1) - ut - pd.q * Y) / pd.p;
    ux[n + 1] = boundary_slope(un1, dx);
    interior_second_diff(un1, dx, Du.row(n + 1));

    if (!std::isfinite(U) || !std::isfinite(Y) || !std::isfinite(un1[N / 2]))
      throw NonFinite("direct solution is not finite", n + 1);
  }
  sol.f = overdetermination(pd, u);
  return sol;
}

TimeSeries synthesize_f(const ProblemData& pd, const Expr& k_true, SynthRefine refine) {
  TimeSeries f = solve_direct(pd, Kernel::from_expr(k_true, pd.grid)).f;
  if (refine == SynthRefine::None) return f;
  ProblemData fine = pd;
  const Grid& g = pd.grid;
  fine.grid = Grid::make(g.ell, g.T, 2 * (g.nx + 1) - 1, g.nt);
  const TimeSeries ff = solve_direct(fine, Kernel::from_expr(k_true, fine.grid)).f;
  for (std::size_t n = 0; n < f.size(); ++n) f[n] = (4.0 * ff[n] - f[n]) / 3.0;
  return f;
}

TimeSeries overdetermination(const ProblemData& pd, const Field& u) {
  const Grid& g = pd.grid;
  const SpaceRow d1 = sample_row(pd.phi.derivative(), g);
  const SpaceRow d3 = sample_row(pd.phi.derivative(3), g);
  SpaceRow wgt(g.nodes());
  for (int i = 0; i < g.nodes(); ++i) wgt[i] = -(d1[i] - pd.beta * d3[i]);
  TimeSeries f{std::vector<double>(u.rows()), g.dt()};
  for (std::size_t n = 0; n < u.rows(); ++n) f[n] = dot_trapz(wgt, u.row(n), g.dx());
  return f;
}

TimeSeries overdetermination_flux_form(const ProblemData& pd, const Field& u) {
  const Grid& g = pd.grid;
  const SpaceRow d0 = sample_row(pd.phi, g);
  const SpaceRow d2 = sample_row(pd.phi.derivative(2), g);
  SpaceRow wgt(g.nodes());
  for (int i = 0; i < g.nodes(); ++i) wgt[i] = d0[i] - pd.beta * d2[i];
  TimeSeries f{std::vector<double>(u.rows()), g.dt()};
  for (std::size_t n = 0; n < u.rows(); ++n) f[n] = dot_trapz(wgt, first_diff(u.row(n), g.dx()), g.dx());
  return f;
}

DirichletStepper::DirichletStepper(const Grid& g, double beta)
    : g_(g), h_(beta, g.nx, g.dx()), rhs_(g.nodes()), acc_(g.nodes()) {}

void DirichletStepper::step(std::span<const double> prev, std::span<const double> curr,
                            std::span<const double> K, std::span<double> next) const {
  const int M = g_.nodes();
  const double dx = g_.dx(), dt = g_.dt();
  interior_second_diff(curr, dx, rhs_);
  for (int i = 1; i + 1 < M; ++i) rhs_[i] += K[i];
  h_.solve(rhs_, 0.0, 0.0, acc_);
  for (int i = 1; i + 1 < M; ++i) next[i] = 2.0 * curr[i] - prev[i] + dt * dt * acc_[i];
  next[0] = 0.0;
  next[M - 1] = 0.0;
}

void DirichletStepper::start(std::span<const double> w0, std::span<const double> w1,
                             std::span<const double> K0, std::span<double> next) const {
  const int M = g_.nodes();
  const double dx = g_.dx(), dt = g_.dt();
  interior_second_diff(w0, dx, rhs_);
  for (int i = 1; i + 1 < M; ++i) rhs_[i] += K0[i];
  h_.solve(rhs_, 0.0, 0.0, acc_);
  for (int i = 1; i + 1 < M; ++i) next[i] = w0[i] + dt * w1[i] + 0.5 * dt * dt * acc_[i];
  next[0] = 0.0;
  next[M - 1] = 0.0;
}

Field solve_linear_dirichlet(const Grid& g, double beta, std::span<const double> v0,
                             std::span<const double> v1, const Field& K) {
  const int M = g.nodes();
  if (static_cast<int>(v0.size()) != M || static_cast<int>(v1.size()) != M)
    throw ShapeError("initial rows must have nx+2 entries");
  if (static_cast<int>(K.rows()) != g.levels() || static_cast<int>(K.cols()) != M)
    throw ShapeError("forcing shape must be (nt+1, nx+2)");
  DirichletStepper st(g, beta);
  Field v(g.levels(), M);
  v.set_row(0, v0);
  v(0, 0) = 0.0;
  v(0, M - 1) = 0.0;
  st.start(v.row(0), v1, K.row(0), v.row(1));
  for (int n = 1; n < g.nt; ++n) {
    st.step(v.row(n - 1), v.row(n), K.row(n), v.row(n + 1));
    if (!std::isfinite(v(n + 1, M / 2))) throw NonFinite("linear solution is not finite", n + 1);
  }
  return v;
}

}  // namespace memkernel

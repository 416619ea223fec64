#include "memkernel/equivalence.hpp"

#include <cmath>
#include <fstream>

#include "memkernel/errors.hpp"
#include "memkernel/io.hpp"

namespace memkernel {

namespace {

constexpr double kDegenerate = 1e-10;

SpaceRow combine(const SpaceRow& a, double c, const SpaceRow& b) {
  SpaceRow r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + c * b[i];
  return r;
}

void finish_setup(const ProblemData& pd, const SetupOptions& opts, EquivSetup& s) {
  const Grid& g = pd.grid;
  const double dx = g.dx();
  const DataRows& r = s.rows;
  s.grid = g;
  s.beta = pd.beta;
  s.p = pd.p;
  s.q = pd.q;

  s.alpha_inv = dot_trapz(r.phi1, r.u0xx, dx);
  s.alpha_degenerate = std::abs(s.alpha_inv) < kDegenerate;
  if (s.alpha_degenerate && opts.strict)
    throw AlphaDegenerate("int phi' u0'' = " + format_double(s.alpha_inv) + " is degenerate");
  s.alpha = s.alpha_degenerate ? 0.0 : 1.0 / s.alpha_inv;

  const double ell = g.ell;
  s.v0.resize(g.nodes());
  for (int i = 0; i < g.nodes(); ++i) s.v0[i] = r.u1[i] - r.u1.back() * r.x[i] / ell;

  const double w0 = dot_trapz(s.v0, r.phi3, dx);
  const double sgn = opts.k0_formula == K0Formula::Derived ? 1.0 : -1.0;
  s.k0 = s.alpha * (s.f[3][0] + sgn * w0);

  s.psi = psi_row(pd);
  s.psi_ell = s.psi.back();
  s.psi_degenerate = std::abs(s.psi_ell) < kDegenerate;
  if (s.psi_degenerate && opts.strict)
    throw PsiDegenerate("psi(ell) = " + format_double(s.psi_ell) + " is degenerate");
  const double inv_psi = s.psi_degenerate ? 0.0 : 1.0 / s.psi_ell;

  s.ghat0 = (s.f[0][0] + dot_trapz(s.psi, r.u0xx, dx)) * inv_psi;
  const SpaceRow w = combine(r.u1xx, -s.k0, r.u0xx);
  s.ypp0 = (s.f[1][0] - s.k0 * s.f[0][0] + dot_trapz(s.psi, w, dx)) * inv_psi;
  s.yp0 = r.u0x.back();
  s.y0 = -(r.u1.back() + pd.p * r.u0x.back()) / pd.q;

  s.u2 = helmholtz_solve(pd.beta, r.u0xx, 0.0, -pd.p * s.ypp0 - pd.q * s.yp0, dx);
  s.v1.resize(g.nodes());
  for (int i = 0; i < g.nodes(); ++i) s.v1[i] = s.u2[i] - s.u2.back() * r.x[i] / ell;
}

}  // namespace

SpaceRow psi_row(const ProblemData& pd, PsiMethod method) {
  const Grid& g = pd.grid;
  SpaceRow out(g.nodes());
  const SpaceRow d1 = sample_row(pd.phi.derivative(), g);
  auto poly = method == PsiMethod::Auto ? pd.phi.polynomial() : std::nullopt;
  if (poly) {
    for (int i = 0; i < g.nodes(); ++i) {
      const double x = g.x(i);
      double acc = 0.0;
      for (std::size_t j = poly->size(); j-- > 0;) acc = acc * x + (*poly)[j] / static_cast<double>(j + 1);
      out[i] = acc * x - pd.beta * d1[i];
    }
  } else {
    double acc = 0.0;
    out[0] = -pd.beta * d1[0];
    for (int i = 1; i < g.nodes(); ++i) {
      acc += quad_gauss([&](double x) { return pd.phi.eval(x); }, g.x(i - 1), g.x(i), 2);
      out[i] = acc - pd.beta * d1[i];
    }
  }
  return out;
}

EquivSetup build_setup(const ProblemData& pd, const Expr& f, const SetupOptions& opts) {
  pd.validate();
  EquivSetup s;
  s.rows = sample_data(pd);
  s.symbolic_f = true;
  Expr d = f;
  for (int j = 0; j < 5; ++j) {
    s.f[j] = sample_series(d, pd.grid);
    d = d.derivative();
  }
  finish_setup(pd, opts, s);
  return s;
}

EquivSetup build_setup(const ProblemData& pd, const TimeSeries& f, const SetupOptions& opts) {
  pd.validate();
  if (static_cast<int>(f.size()) != pd.grid.levels())
    throw ShapeError("measurement length " + std::to_string(f.size()) + " does not match nt+1 = " +
                     std::to_string(pd.grid.levels()));
  EquivSetup s;
  s.rows = sample_data(pd);
  s.symbolic_f = false;
  TimeSeries base = f;
  base.dt = pd.grid.dt();
  if (opts.smoothing_window > 0) base = savgol_smooth(base, opts.smoothing_window);
  for (int j = 0; j < 5; ++j) s.f[j] = derivative_series(base, j);
  finish_setup(pd, opts, s);
  return s;
}

DirectStart direct_start(const ProblemData& pd, const DataRows& r, double k0, const BoundaryStart* bs) {
  BoundaryStart none;
  const BoundaryStart& b = bs ? *bs : none;
  DirectStart d;
  d.yp0 = r.u0x.back() - b.gflux0;
  d.y0 = (b.gode0 - r.u1.back() - pd.p * d.yp0) / pd.q;
  d.ypp0 = r.u1x.back() - k0 * r.u0x.back() - b.gflux_dot0;
  const double right = -pd.p * d.ypp0 - pd.q * d.yp0 + b.gode_dot0;
  SpaceRow rhs = r.u0xx;
  if (!b.interior0.empty())
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += b.interior0[i];
  d.u2 = helmholtz_solve(pd.beta, rhs, 0.0, right, pd.grid.dx());
  return d;
}

bool CompatibilityReport::all_pass() const {
  for (const auto& l : lines)
    if (!l.pass) return false;
  return true;
}

const CheckLine* CompatibilityReport::find(const std::string& name) const {
  for (const auto& l : lines)
    if (l.name == name) return &l;
  return nullptr;
}

void CompatibilityReport::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "name,value,tolerance,pass\n";
  for (const auto& l : lines)
    out << l.name << ',' << format_double(l.value) << ',' << format_double(l.tolerance) << ','
        << (l.pass ? "true" : "false") << '\n';
}

CompatibilityReport check_compatibility(const ProblemData& pd, const EquivSetup& s,
                                        std::optional<double> declared_k0, double rtol) {
  if (rtol <= 0.0) rtol = s.symbolic_f ? 1e-6 : 1e-3;
  const double ell = pd.ell();
  const double beta = pd.beta;
  const Expr du0 = pd.u0.derivative(), d2u0 = du0.derivative();
  const Expr du1 = pd.u1.derivative(), d2u1 = du1.derivative();
  const Expr p1 = pd.phi.derivative(), p2 = p1.derivative();
  const int cells = 4 * (pd.grid.nx + 1);
  const double k0 = declared_k0.value_or(s.k0);

  // Identities at t = 0 for f and its first three derivatives. The
  // Helmholtz inverses are removed by integrating by parts against phi'.
  const double i0 = quad_gauss([&](double x) { return (pd.phi.eval(x) - beta * p2.eval(x)) * du0.eval(x); },
                               0.0, ell, cells);
  const double i1 = quad_gauss([&](double x) { return (pd.phi.eval(x) - beta * p2.eval(x)) * du1.eval(x); },
                               0.0, ell, cells);
  const double i2 = -quad_gauss([&](double x) { return p1.eval(x) * d2u0.eval(x); }, 0.0, ell, cells);
  const double i3 = -quad_gauss(
      [&](double x) { return p1.eval(x) * (d2u1.eval(x) - k0 * d2u0.eval(x)); }, 0.0, ell, cells);

  CompatibilityReport rep;
  const double id[4] = {i0, i1, i2, i3};
  for (int j = 0; j < 4; ++j) {
    const double fj = s.f[j][0];
    const double res = id[j] - fj;
    const double tol = rtol * (1.0 + std::abs(fj));
    rep.lines.push_back({"i4_j" + std::to_string(j), res, tol, std::isfinite(res) && std::abs(res) <= tol});
  }
  const char* names[3] = {"phi", "phi_x", "phi_xx"};
  const Expr ph[3] = {pd.phi, p1, p2};
  for (int d = 0; d < 3; ++d) {
    for (int side = 0; side < 2; ++side) {
      const double v = ph[d].eval(side ? ell : 0.0);
      rep.lines.push_back({std::string("i1_") + names[d] + (side ? "_ell" : "_0"), v, 1e-10,
                           std::abs(v) <= 1e-10});
    }
  }
  return rep;
}

double G_apply(const EquivSetup& s, std::span<const double> wxx, double fprime) {
  if (s.psi_degenerate) return 0.0;
  return (fprime + dot_trapz(s.psi, wxx, s.grid.dx())) / s.psi_ell;
}

double Ghat_apply(const EquivSetup& s, std::span<const double> wxx, double f) {
  return G_apply(s, wxx, f);
}

VTransform v_from_u(const ProblemData& pd, const Field& u, const TimeSeries& y, const TimeSeries& yp) {
  const Grid& g = pd.grid;
  const std::size_t nr = u.rows(), nc = u.cols();
  if (nr != y.size() || nr != yp.size()) throw ShapeError("v_from_u length mismatch");
  if (nr < 3) throw ShapeError("v_from_u needs at least 3 levels");
  VTransform out{Field(nr, nc), TimeSeries{std::vector<double>(nr), y.dt}};
  const double dt = y.dt;
  // Inside, z is the two-step average of the integrated boundary relation
  // p (y^{n+1} - y^n)/dt + q (y^{n+1} + y^n)/2 = -(u^{n+1} - u^n)(ell)/dt,
  // so that v vanishes at x = ell exactly for the discrete direct solution.
  out.z[0] = pd.p * yp[0] + pd.q * y[0];
  out.z[nr - 1] = pd.p * yp[nr - 1] + pd.q * y[nr - 1];
  for (std::size_t n = 1; n + 1 < nr; ++n)
    out.z[n] = pd.p * (y[n + 1] - y[n - 1]) / (2.0 * dt) +
               pd.q * 0.25 * (y[n + 1] + 2.0 * y[n] + y[n - 1]);
  for (std::size_t n = 0; n < nr; ++n) {
    for (std::size_t i = 0; i < nc; ++i) {
      double ut;
      if (n == 0)
        ut = (-3.0 * u(0, i) + 4.0 * u(1, i) - u(2, i)) / (2.0 * dt);
      else if (n + 1 == nr)
        ut = (3.0 * u(n, i) - 4.0 * u(n - 1, i) + u(n - 2, i)) / (2.0 * dt);
      else
        ut = (u(n + 1, i) - u(n - 1, i)) / (2.0 * dt);
      out.v(n, i) = ut + out.z[n] * g.x(static_cast<int>(i)) / g.ell;
    }
  }
  return out;
}

Field u_from_v(const Grid& g, const Field& v, const TimeSeries& z, std::span<const double> u0) {
  const std::size_t nr = v.rows(), nc = v.cols();
  if (z.size() != nr || u0.size() != nc) throw ShapeError("u_from_v shape mismatch");
  Field u(nr, nc);
  u.set_row(0, u0);
  const double dt = z.dt;
  for (std::size_t n = 1; n < nr; ++n) {
    for (std::size_t i = 0; i < nc; ++i) {
      const double xl = g.x(static_cast<int>(i)) / g.ell;
      const double a = v(n - 1, i) - z[n - 1] * xl;
      const double b = v(n, i) - z[n] * xl;
      u(n, i) = u(n - 1, i) + 0.5 * dt * (a + b);
    }
  }
  return u;
}

double equivalence_residual(const ProblemData& pd, const Kernel& k, const Field& v, const TimeSeries& z) {
  const Grid& g = pd.grid;
  const std::size_t nr = v.rows(), nc = v.cols();
  if (nr < 6) throw ShapeError("equivalence_residual needs at least 6 levels");
  const double dx = g.dx(), dt = z.dt;
  Field vxx(nr, nc);
  for (std::size_t n = 0; n < nr; ++n) second_diff_into(v.row(n), dx, vxx.row(n));
  const Field c = conv_field(k.k, vxx);
  const SpaceRow u0xx = sample_row(pd.u0.derivative(2), g);
  double acc = 0.0;
  // same three-point stencil in time for v and z, so that v_tt - z'' x/ell
  // is exactly the discrete u_ttt; levels whose stencils reach the
  // one-sided end values are skipped
  for (std::size_t n = 2; n + 2 < nr; ++n) {
    const double z2 = (z[n + 1] - 2.0 * z[n] + z[n - 1]) / (dt * dt);
    double row = 0.0;
    for (std::size_t i = 1; i + 1 < nc; ++i) {
      const double vtt = (v(n + 1, i) - 2.0 * v(n, i) + v(n - 1, i)) / (dt * dt);
      const double vxxtt = (vxx(n + 1, i) - 2.0 * vxx(n, i) + vxx(n - 1, i)) / (dt * dt);
      const double r = vtt - vxx(n, i) - pd.beta * vxxtt + k.k[n] * u0xx[i] + c(n, i) -
                       z2 * g.x(static_cast<int>(i)) / g.ell;
      row += r * r;
    }
    acc += row * dx;
  }
  return std::sqrt(acc * dt);
}

}  // namespace memkernel

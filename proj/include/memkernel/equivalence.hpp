#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "memkernel/problem.hpp"
#include "memkernel/volterra.hpp"

namespace memkernel {

// Which sign to use in front of int v0 phi''' in the k(0) formula.
// Derived: k(0) = alpha (f'''(0) + int v0 phi'''), which follows from
// pairing the transformed equation with phi' at t = 0.
enum class K0Formula { Derived, AsPrinted };

struct SetupOptions {
  bool strict = true;          // throw on degenerate alpha or psi(ell)
  int smoothing_window = 0;    // 0 disables smoothing of sampled f
  K0Formula k0_formula = K0Formula::Derived;
};

// Everything the inverse map needs that is fixed by the data.
struct EquivSetup {
  Grid grid;
  double beta = 0.0, p = 0.0, q = 0.0;
  DataRows rows;
  std::array<TimeSeries, 5> f;  // f and its first four derivatives
  bool symbolic_f = false;

  double alpha_inv = 0.0, alpha = 0.0;
  double k0 = 0.0;
  SpaceRow psi;
  double psi_ell = 0.0;
  double ghat0 = 0.0;  // G^[u_xx](0)
  double y0 = 0.0, yp0 = 0.0, ypp0 = 0.0;
  SpaceRow u2, v0, v1;
  bool alpha_degenerate = false, psi_degenerate = false;
};

EquivSetup build_setup(const ProblemData& pd, const Expr& f, const SetupOptions& opts = {});
EquivSetup build_setup(const ProblemData& pd, const TimeSeries& f, const SetupOptions& opts = {});

enum class PsiMethod { Auto, Quadrature };
// psi(x) = int_0^x phi - beta phi'(x); exact antiderivative when phi is a
// polynomial, composite Gauss-Legendre otherwise.
SpaceRow psi_row(const ProblemData& pd, PsiMethod method = PsiMethod::Auto);

// Composite 4-point Gauss-Legendre rule over ncells equal cells.
template <class F>
double quad_gauss(F&& fn, double a, double b, int ncells);

// Initial state of the direct problem; the optional boundary forcing
// values enter the two boundary relations additively.
struct BoundaryStart {
  double gflux0 = 0.0, gflux_dot0 = 0.0, gode0 = 0.0, gode_dot0 = 0.0;
  SpaceRow interior0;  // interior forcing at t = 0, empty when absent
};
struct DirectStart {
  double y0 = 0.0, yp0 = 0.0, ypp0 = 0.0;
  SpaceRow u2;
};
DirectStart direct_start(const ProblemData& pd, const DataRows& rows, double k0,
                         const BoundaryStart* bs = nullptr);

struct CheckLine {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct CompatibilityReport {
  std::vector<CheckLine> lines;
  bool all_pass() const;
  const CheckLine* find(const std::string& name) const;
  void write(const std::filesystem::path& path) const;
};

// rtol <= 0 picks 1e-6 for symbolic f and 1e-3 for sampled f.
CompatibilityReport check_compatibility(const ProblemData& pd, const EquivSetup& s,
                                        std::optional<double> declared_k0 = std::nullopt,
                                        double rtol = -1.0);

double G_apply(const EquivSetup& s, std::span<const double> wxx, double fprime);
double Ghat_apply(const EquivSetup& s, std::span<const double> wxx, double f);

struct VTransform {
  Field v;
  TimeSeries z;
};
// v = u_t + z x / ell with z = p y' + q y.
VTransform v_from_u(const ProblemData& pd, const Field& u, const TimeSeries& y,
                    const TimeSeries& yp);
// u = u0 + int_0^t (v - z x / ell).
Field u_from_v(const Grid& g, const Field& v, const TimeSeries& z, std::span<const double> u0);

// Discrete L2 norm of the residual of the transformed equation over
// interior nodes and interior time levels.
double equivalence_residual(const ProblemData& pd, const Kernel& k, const Field& v,
                            const TimeSeries& z);

// ---- implementation of the template ----

template <class F>
double quad_gauss(F&& fn, double a, double b, int ncells) {
  static constexpr double xg[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                   0.8611363115940526};
  static constexpr double wg[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                   0.3478548451374538};
  const double h = (b - a) / ncells;
  double s = 0.0;
  for (int c = 0; c < ncells; ++c) {
    const double mid = a + (c + 0.5) * h;
    for (int j = 0; j < 4; ++j) s += wg[j] * fn(mid + 0.5 * h * xg[j]);
  }
  return 0.5 * h * s;
}

}  // namespace memkernel

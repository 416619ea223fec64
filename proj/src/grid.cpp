#include "memkernel/grid.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include "memkernel/errors.hpp"
#include "memkernel/io.hpp"

namespace memkernel {

Grid Grid::make(double ell, double T, int nx, int nt) {
  if (!(ell > 0.0) || !std::isfinite(ell)) throw ConfigError("ell must be positive");
  if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("T must be positive");
  if (nx < 3) throw ConfigError("nx must be at least 3");
  if (nt < 2) throw ConfigError("nt must be at least 2");
  return Grid{ell, T, nx, nt};
}

std::vector<double> Grid::x_nodes() const {
  std::vector<double> r(nodes());
  for (int i = 0; i < nodes(); ++i) r[i] = x(i);
  return r;
}

std::vector<double> Grid::t_nodes() const {
  std::vector<double> r(levels());
  for (int n = 0; n < levels(); ++n) r[n] = t(n);
  return r;
}

void Field::set_row(std::size_t n, std::span<const double> r) {
  if (r.size() != cols_) throw ShapeError("row length mismatch");
  std::copy(r.begin(), r.end(), data_.begin() + n * cols_);
}

void second_diff_into(std::span<const double> u, double dx, std::span<double> out) {
  const std::size_t m = u.size();
  if (m < 3) throw ShapeError("second_diff needs at least 3 nodes");
  if (out.size() != m) throw ShapeError("second_diff output size");
  const double h2 = 1.0 / (dx * dx);
  for (std::size_t i = 1; i + 1 < m; ++i) out[i] = (u[i - 1] - 2.0 * u[i] + u[i + 1]) * h2;
  if (m >= 4) {
    out[0] = (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) * h2;
    out[m - 1] = (2.0 * u[m - 1] - 5.0 * u[m - 2] + 4.0 * u[m - 3] - u[m - 4]) * h2;
  } else {
    out[0] = out[1];
    out[2] = out[1];
  }
}

SpaceRow second_diff(std::span<const double> row, double dx) {
  SpaceRow out(row.size());
  second_diff_into(row, dx, out);
  return out;
}

SpaceRow first_diff(std::span<const double> u, double dx) {
  const std::size_t m = u.size();
  if (m < 3) throw ShapeError("first_diff needs at least 3 nodes");
  SpaceRow out(m);
  for (std::size_t i = 1; i + 1 < m; ++i) out[i] = (u[i + 1] - u[i - 1]) / (2.0 * dx);
  out[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * dx);
  out[m - 1] = (3.0 * u[m - 1] - 4.0 * u[m - 2] + u[m - 3]) / (2.0 * dx);
  return out;
}

double quad_trapz(std::span<const double> row, double dx) {
  if (row.size() < 2) return 0.0;
  double s = 0.5 * (row.front() + row.back());
  for (std::size_t i = 1; i + 1 < row.size(); ++i) s += row[i];
  return s * dx;
}

double dot_trapz(std::span<const double> a, std::span<const double> b, double dx) {
  if (a.size() != b.size()) throw ShapeError("dot_trapz size mismatch");
  if (a.size() < 2) return 0.0;
  const std::size_t m = a.size();
  double s = 0.5 * (a[0] * b[0] + a[m - 1] * b[m - 1]);
  for (std::size_t i = 1; i + 1 < m; ++i) s += a[i] * b[i];
  return s * dx;
}

HelmholtzSolver::HelmholtzSolver(double beta, int nx, double dx) : beta_(beta), dx_(dx), nx_(nx) {
  if (beta < 0.0) throw ConfigError("beta must be non-negative");
  const double r = beta / (dx * dx);
  const double diag = 1.0 + 2.0 * r;
  off_ = -r;
  cprime_.resize(nx);
  denom_.resize(nx);
  // Thomas forward sweep on a constant tridiagonal matrix
  double c_prev = 0.0;
  for (int i = 0; i < nx; ++i) {
    double d = diag - (i ? off_ * c_prev : 0.0);
    denom_[i] = d;
    c_prev = off_ / d;
    cprime_[i] = c_prev;
  }
}

void HelmholtzSolver::solve(std::span<const double> rhs, double left, double right,
                            std::span<double> out) const {
  const std::size_t m = static_cast<std::size_t>(nx_) + 2;
  if (rhs.size() != m || out.size() != m) throw ShapeError("helmholtz size mismatch");
  out[0] = left;
  out[m - 1] = right;
  if (beta_ == 0.0) {
    for (int i = 1; i <= nx_; ++i) out[i] = rhs[i];
    return;
  }
  // forward
  double d_prev = 0.0;
  for (int i = 0; i < nx_; ++i) {
    double b = rhs[i + 1];
    if (i == 0) b -= off_ * left;
    if (i == nx_ - 1) b -= off_ * right;
    double d = (b - (i ? off_ * d_prev : 0.0)) / denom_[i];
    out[i + 1] = d;
    d_prev = d;
  }
  for (int i = nx_ - 2; i >= 0; --i) out[i + 1] -= cprime_[i] * out[i + 2];
}

SpaceRow helmholtz_solve(double beta, std::span<const double> rhs, double left, double right,
                         double dx) {
  if (beta < 0.0) throw ConfigError("beta must be non-negative");
  if (rhs.size() < 3) throw ShapeError("helmholtz needs at least 3 nodes");
  HelmholtzSolver s(beta, static_cast<int>(rhs.size()) - 2, dx);
  SpaceRow out(rhs.size());
  s.solve(rhs, left, right, out);
  return out;
}

SpaceRow sample_row(const Expr& e, const Grid& g) {
  SpaceRow r(g.nodes());
  for (int i = 0; i < g.nodes(); ++i) r[i] = e.eval(g.x(i));
  return r;
}

void write_field(const std::filesystem::path& path, const Grid& g, const Field& f, FieldFormat fmt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  const double dt = g.T / static_cast<double>(f.rows() > 1 ? f.rows() - 1 : 1);
  auto tn = [&](std::size_t n) { return n + 1 == f.rows() ? g.T : static_cast<double>(n) * dt; };
  if (fmt == FieldFormat::Long) {
    out << "x,t,value\n";
    for (std::size_t n = 0; n < f.rows(); ++n)
      for (std::size_t i = 0; i < f.cols(); ++i)
        out << format_double(g.x(static_cast<int>(i))) << ',' << format_double(tn(n)) << ','
            << format_double(f(n, i)) << '\n';
  } else {
    out << "t";
    for (std::size_t i = 0; i < f.cols(); ++i) out << ',' << format_double(g.x(static_cast<int>(i)));
    out << '\n';
    for (std::size_t n = 0; n < f.rows(); ++n) {
      out << format_double(tn(n));
      for (std::size_t i = 0; i < f.cols(); ++i) out << ',' << format_double(f(n, i));
      out << '\n';
    }
  }
}

}  // namespace memkernel

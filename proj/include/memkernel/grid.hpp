#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "memkernel/expr.hpp"

namespace memkernel {

// Uniform space-time grid. Space nodes x_0 = 0 .. x_{nx+1} = ell,
// time levels t_0 = 0 .. t_nt = T.
struct Grid {
  double ell = 1.0;
  double T = 1.0;
  int nx = 0;
  int nt = 0;

  static Grid make(double ell, double T, int nx, int nt);

  double dx() const { return ell / (nx + 1); }
  double dt() const { return T / nt; }
  double x(int i) const { return i == nx + 1 ? ell : i * dx(); }
  double t(int n) const { return n == nt ? T : n * dt(); }
  int nodes() const { return nx + 2; }
  int levels() const { return nt + 1; }
  std::vector<double> x_nodes() const;
  std::vector<double> t_nodes() const;
};

using SpaceRow = std::vector<double>;

// Row-major (time, space) array.
class Field {
 public:
  Field() = default;
  Field(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::span<double> row(std::size_t n) { return {data_.data() + n * cols_, cols_}; }
  std::span<const double> row(std::size_t n) const { return {data_.data() + n * cols_, cols_}; }
  double& operator()(std::size_t n, std::size_t i) { return data_[n * cols_ + i]; }
  double operator()(std::size_t n, std::size_t i) const { return data_[n * cols_ + i]; }
  void set_row(std::size_t n, std::span<const double> r);
  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

// Three-point second difference; end values use the one-sided
// second-order stencil (2u0 - 5u1 + 4u2 - u3)/dx^2.
SpaceRow second_diff(std::span<const double> row, double dx);
void second_diff_into(std::span<const double> row, double dx, std::span<double> out);

// Central first difference with second-order one-sided ends.
SpaceRow first_diff(std::span<const double> row, double dx);

double quad_trapz(std::span<const double> row, double dx);
double dot_trapz(std::span<const double> a, std::span<const double> b, double dx);

// Solves w - beta w_xx = rhs on interior nodes with prescribed end values.
SpaceRow helmholtz_solve(double beta, std::span<const double> rhs, double left, double right,
                         double dx);

// Cached factorization of the interior operator for repeated solves.
class HelmholtzSolver {
 public:
  HelmholtzSolver(double beta, int nx, double dx);
  void solve(std::span<const double> rhs, double left, double right, std::span<double> out) const;

 private:
  double beta_, dx_;
  int nx_;
  double off_;
  std::vector<double> cprime_, denom_;
};

SpaceRow sample_row(const Expr& e, const Grid& g);

enum class FieldFormat { Long, Matrix };
void write_field(const std::filesystem::path& path, const Grid& g, const Field& f,
                 FieldFormat fmt = FieldFormat::Long);

}  // namespace memkernel

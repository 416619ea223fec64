#include "memkernel/energy.hpp"

#include <cmath>

#include "memkernel/errors.hpp"
#include "memkernel/io.hpp"

namespace memkernel {

double h2_row_norm(std::span<const double> w, double dx) {
  const SpaceRow wx = first_diff(w, dx);
  const SpaceRow wxx = second_diff(w, dx);
  return std::sqrt(dot_trapz(w, w, dx) + dot_trapz(wx, wx, dx) + dot_trapz(wxx, wxx, dx));
}

Field time_derivative(const Field& w, int order, double dt) {
  const std::size_t R = w.rows(), C = w.cols();
  if (order == 0) return w;
  if (R < 3) throw ShapeError("time_derivative needs at least 3 rows");
  Field d(R, C);
  if (order == 1) {
    for (std::size_t n = 0; n < R; ++n)
      for (std::size_t i = 0; i < C; ++i) {
        if (n == 0)
          d(n, i) = (-3.0 * w(0, i) + 4.0 * w(1, i) - w(2, i)) / (2.0 * dt);
        else if (n + 1 == R)
          d(n, i) = (3.0 * w(n, i) - 4.0 * w(n - 1, i) + w(n - 2, i)) / (2.0 * dt);
        else
          d(n, i) = (w(n + 1, i) - w(n - 1, i)) / (2.0 * dt);
      }
    return d;
  }
  if (order != 2) throw ShapeError("time_derivative order must be 0, 1 or 2");
  const double h2 = 1.0 / (dt * dt);
  for (std::size_t n = 0; n < R; ++n)
    for (std::size_t i = 0; i < C; ++i) {
      if (R >= 4 && n == 0)
        d(n, i) = (2.0 * w(0, i) - 5.0 * w(1, i) + 4.0 * w(2, i) - w(3, i)) * h2;
      else if (R >= 4 && n + 1 == R)
        d(n, i) = (2.0 * w(n, i) - 5.0 * w(n - 1, i) + 4.0 * w(n - 2, i) - w(n - 3, i)) * h2;
      else {
        const std::size_t c = std::min(std::max<std::size_t>(n, 1), R - 2);
        d(n, i) = (w(c + 1, i) - 2.0 * w(c, i) + w(c - 1, i)) * h2;
      }
    }
  return d;
}

namespace {

double l2_rows_h2(const Field& w, double dx, double dt) {
  const std::size_t R = w.rows();
  if (R < 2) return 0.0;
  double acc = 0.0;
  for (std::size_t n = 0; n < R; ++n) {
    const double r = h2_row_norm(w.row(n), dx);
    acc += (n == 0 || n + 1 == R ? 0.5 : 1.0) * r * r;
  }
  return std::sqrt(acc * dt);
}

}  // namespace

double h2_time_norm(const Field& w, double dx, double dt) {
  double s = l2_rows_h2(w, dx, dt);
  s += l2_rows_h2(time_derivative(w, 1, dt), dx, dt);
  s += l2_rows_h2(time_derivative(w, 2, dt), dx, dt);
  return s;
}

void EnergyTrack::write(const std::filesystem::path& path) const {
  write_csv(path, {"t", "E1", "E2", "cum_vtt", "cum_vxtt", "cum_vxxtt"},
            {t, E1, E2, cum_vtt, cum_vxtt, cum_vxxtt});
}

EnergyTrack energy_series(const Field& v, double beta, const Grid& g) {
  const std::size_t R = v.rows();
  const double dx = g.dx(), dt = g.dt();
  const Field vt = time_derivative(v, 1, dt);
  const Field vtt = time_derivative(v, 2, dt);
  EnergyTrack e;
  e.t.resize(R);
  e.E1.resize(R);
  e.E2.resize(R);
  e.cum_vtt.assign(R, 0.0);
  e.cum_vxtt.assign(R, 0.0);
  e.cum_vxxtt.assign(R, 0.0);
  std::vector<double> a(R), b(R), c(R);
  for (std::size_t n = 0; n < R; ++n) {
    e.t[n] = static_cast<double>(n) * dt;
    const SpaceRow vx = first_diff(v.row(n), dx);
    const SpaceRow vxx = second_diff(v.row(n), dx);
    const SpaceRow vxt = first_diff(vt.row(n), dx);
    const SpaceRow vxxt = second_diff(vt.row(n), dx);
    const double nvt = dot_trapz(vt.row(n), vt.row(n), dx);
    const double nvx = dot_trapz(vx, vx, dx);
    const double nvxt = dot_trapz(vxt, vxt, dx);
    const double nvxx = dot_trapz(vxx, vxx, dx);
    const double nvxxt = dot_trapz(vxxt, vxxt, dx);
    e.E1[n] = 0.5 * (nvt + nvx + beta * nvxt);
    e.E2[n] = 0.5 * (nvxt + nvxx + beta * nvxxt);
    const SpaceRow wx = first_diff(vtt.row(n), dx);
    const SpaceRow wxx = second_diff(vtt.row(n), dx);
    a[n] = dot_trapz(vtt.row(n), vtt.row(n), dx);
    b[n] = dot_trapz(wx, wx, dx);
    c[n] = dot_trapz(wxx, wxx, dx);
    if (n > 0) {
      e.cum_vtt[n] = e.cum_vtt[n - 1] + 0.5 * dt * (a[n - 1] + a[n]);
      e.cum_vxtt[n] = e.cum_vxtt[n - 1] + 0.5 * dt * (b[n - 1] + b[n]);
      e.cum_vxxtt[n] = e.cum_vxxtt[n - 1] + 0.5 * dt * (c[n - 1] + c[n]);
    }
  }
  return e;
}

double estimate_data_norm(std::span<const double> v0, std::span<const double> v1, const Field& K,
                          const Grid& g) {
  const double dx = g.dx(), dt = g.dt();
  double acc = 0.0;
  const std::size_t R = K.rows();
  for (std::size_t n = 0; n < R; ++n)
    acc += (n == 0 || n + 1 == R ? 0.5 : 1.0) * dot_trapz(K.row(n), K.row(n), dx);
  return h2_row_norm(v0, dx) + h2_row_norm(v1, dx) + std::sqrt(acc * dt);
}

double check_estimate(const Field& v, std::span<const double> v0, std::span<const double> v1,
                      const Field& K, const Grid& g, double C) {
  return C * estimate_data_norm(v0, v1, K, g) - h2_time_norm(v, g.dx(), g.dt());
}

}  // namespace memkernel

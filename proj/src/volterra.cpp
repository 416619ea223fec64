#include "memkernel/volterra.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "memkernel/errors.hpp"
#include "memkernel/io.hpp"

namespace memkernel {

namespace {

void require_same(const TimeSeries& a, const TimeSeries& b) {
  if (a.size() != b.size()) throw ShapeError("series length mismatch");
  if (std::abs(a.dt - b.dt) > 1e-12 * std::max(1.0, std::abs(a.dt)))
    throw ShapeError("series step mismatch");
}

}  // namespace

TimeSeries sample_series(const Expr& e, const Grid& g) {
  TimeSeries s{std::vector<double>(g.levels()), g.dt()};
  for (int n = 0; n < g.levels(); ++n) s[n] = e.eval(g.t(n));
  return s;
}

Kernel Kernel::from_kprime(const TimeSeries& kprime, double k0) {
  Kernel k;
  k.kprime = kprime;
  k.k0 = k0;
  k.k = integrate_prefix(kprime, k0);
  return k;
}

Kernel Kernel::from_expr(const Expr& k, const Grid& g) {
  return from_kprime(sample_series(k.derivative(), g), k.eval(0.0));
}

Kernel Kernel::zero(const Grid& g) {
  return from_kprime(TimeSeries{std::vector<double>(g.levels(), 0.0), g.dt()}, 0.0);
}

double conv_at(const TimeSeries& k, const TimeSeries& g, std::size_t n) {
  if (n == 0) return 0.0;
  double s = 0.5 * (k[n] * g[0] + k[0] * g[n]);
  for (std::size_t m = 1; m < n; ++m) s += k[n - m] * g[m];
  return s * k.dt;
}

TimeSeries conv(const TimeSeries& k, const TimeSeries& g) {
  require_same(k, g);
  TimeSeries r{std::vector<double>(k.size(), 0.0), k.dt};
  for (std::size_t n = 1; n < k.size(); ++n) r[n] = conv_at(k, g, n);
  return r;
}

Field conv_field(const TimeSeries& k, const Field& F) {
  if (F.rows() != k.size()) throw ShapeError("conv_field length mismatch");
  Field out(F.rows(), F.cols(), 0.0);
  const std::size_t m = F.cols();
  for (std::size_t n = 1; n < F.rows(); ++n) {
    auto o = out.row(n);
    auto f0 = F.row(0), fn = F.row(n);
    for (std::size_t i = 0; i < m; ++i) o[i] = 0.5 * (k[n] * f0[i] + k[0] * fn[i]);
    for (std::size_t j = 1; j < n; ++j) {
      const double w = k[n - j];
      auto fj = F.row(j);
      for (std::size_t i = 0; i < m; ++i) o[i] += w * fj[i];
    }
    for (std::size_t i = 0; i < m; ++i) o[i] *= k.dt;
  }
  return out;
}

TimeSeries integrate_prefix(const TimeSeries& s, double s0) {
  TimeSeries r{std::vector<double>(s.size(), s0), s.dt};
  for (std::size_t n = 1; n < s.size(); ++n) r[n] = r[n - 1] + 0.5 * s.dt * (s[n - 1] + s[n]);
  return r;
}

double l2_time_norm(const TimeSeries& s, std::size_t upto) {
  if (upto >= s.size()) throw ShapeError("l2_time_norm index out of range");
  if (upto == 0) return 0.0;
  double acc = 0.5 * (s[0] * s[0] + s[upto] * s[upto]);
  for (std::size_t n = 1; n < upto; ++n) acc += s[n] * s[n];
  return std::sqrt(acc * s.dt);
}

double l2_time_norm(const TimeSeries& s) { return s.size() ? l2_time_norm(s, s.size() - 1) : 0.0; }

double check_young(const TimeSeries& k, const TimeSeries& g) {
  require_same(k, g);
  TimeSeries c = conv(k, g);
  return std::sqrt(k.horizon()) * l2_time_norm(k) * l2_time_norm(g) - l2_time_norm(c);
}

TimeSeries fd_derivative(const TimeSeries& s) {
  const std::size_t m = s.size();
  if (m < 3) throw ShapeError("fd_derivative needs at least 3 samples");
  TimeSeries r{std::vector<double>(m), s.dt};
  for (std::size_t n = 1; n + 1 < m; ++n) r[n] = (s[n + 1] - s[n - 1]) / (2.0 * s.dt);
  r[0] = (-3.0 * s[0] + 4.0 * s[1] - s[2]) / (2.0 * s.dt);
  r[m - 1] = (3.0 * s[m - 1] - 4.0 * s[m - 2] + s[m - 3]) / (2.0 * s.dt);
  return r;
}

ZeroStartMargins check_zero_start(const TimeSeries& w, double slack_factor) {
  if (w.size() < 3) throw ShapeError("check_zero_start needs at least 3 samples");
  if (w[0] != 0.0) throw ShapeError("check_zero_start requires w(0) = 0");
  TimeSeries wt = fd_derivative(w);
  const double tau = w.horizon();
  const double nwt = l2_time_norm(wt);
  const double slack = slack_factor * w.dt * nwt;
  double sup = 0.0;
  for (double v : w.values) sup = std::max(sup, std::abs(v));
  return {std::sqrt(tau) * nwt + slack - sup, tau * nwt + slack - l2_time_norm(w)};
}

std::vector<std::vector<double>> fornberg_weights(double z, std::span<const double> x, int m) {
  const int n = static_cast<int>(x.size()) - 1;
  std::vector<std::vector<double>> c(m + 1, std::vector<double>(n + 1, 0.0));
  double c1 = 1.0, c4 = x[0] - z;
  c[0][0] = 1.0;
  for (int i = 1; i <= n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c;
}

int derivative_stride(int d, int length, double dt) {
  const int r = d <= 2 ? 2 : 3;
  // step that balances eps/h^d rounding against the h^4 truncation
  const double h = std::pow(std::numeric_limits<double>::epsilon(), 1.0 / (d + 4));
  const int cap = std::max(1, (length - 1) / (2 * r));
  return std::clamp(static_cast<int>(h / dt), 1, cap);
}

TimeSeries derivative_series(const TimeSeries& s, int d, int stride) {
  if (d == 0) return s;
  if (d < 0 || d > 4) throw ShapeError("derivative order must be within 0..4");
  const int r = d <= 2 ? 2 : 3;
  const int width = 2 * r + 1;
  const int m = static_cast<int>(s.size());
  if (m < width) throw ShapeError("series too short for derivative estimate");
  const int h = stride > 0 ? stride : derivative_stride(d, m, s.dt);
  const int span = (width - 1) * h;
  if (span >= m) throw ShapeError("derivative stride too large for series");
  std::vector<double> offs(width);
  for (int j = 0; j < width; ++j) offs[j] = j;
  TimeSeries out{std::vector<double>(m), s.dt};
  const double scale = std::pow(s.dt * h, -d);
  // weights depend only on the offset of n inside its stencil
  std::vector<std::vector<double>> cache(span + 1);
  for (int n = 0; n < m; ++n) {
    const int lo = std::clamp(n - r * h, 0, m - 1 - span);
    const int pos = n - lo;
    if (cache[pos].empty()) cache[pos] = fornberg_weights(static_cast<double>(pos) / h, offs, d)[d];
    double acc = 0.0;
    for (int j = 0; j < width; ++j) acc += cache[pos][j] * s[lo + j * h];
    out[n] = acc * scale;
  }
  return out;
}

TimeSeries savgol_smooth(const TimeSeries& s, int window) {
  if (window < 5 || window % 2 == 0) throw ConfigError("smoothing window must be odd and >= 5");
  const int m = static_cast<int>(s.size());
  if (m < window) return s;
  const int h = window / 2;
  TimeSeries out{std::vector<double>(m), s.dt};
  // local cubic least-squares fit evaluated at the target node
  for (int n = 0; n < m; ++n) {
    const int lo = std::clamp(n - h, 0, m - window);
    std::array<double, 16> A{};
    std::array<double, 4> b{};
    for (int j = 0; j < window; ++j) {
      const double x = static_cast<double>(lo + j - n);
      double p[4] = {1.0, x, x * x, x * x * x};
      for (int a = 0; a < 4; ++a) {
        b[a] += p[a] * s[lo + j];
        for (int c = 0; c < 4; ++c) A[a * 4 + c] += p[a] * p[c];
      }
    }
    // Gaussian elimination with partial pivoting
    for (int col = 0; col < 4; ++col) {
      int piv = col;
      for (int r2 = col + 1; r2 < 4; ++r2)
        if (std::abs(A[r2 * 4 + col]) > std::abs(A[piv * 4 + col])) piv = r2;
      if (piv != col) {
        for (int c = 0; c < 4; ++c) std::swap(A[col * 4 + c], A[piv * 4 + c]);
        std::swap(b[col], b[piv]);
      }
      for (int r2 = col + 1; r2 < 4; ++r2) {
        const double f = A[r2 * 4 + col] / A[col * 4 + col];
        for (int c = col; c < 4; ++c) A[r2 * 4 + c] -= f * A[col * 4 + c];
        b[r2] -= f * b[col];
      }
    }
    std::array<double, 4> coef{};
    for (int r2 = 3; r2 >= 0; --r2) {
      double acc = b[r2];
      for (int c = r2 + 1; c < 4; ++c) acc -= A[r2 * 4 + c] * coef[c];
      coef[r2] = acc / A[r2 * 4 + r2];
    }
    out[n] = coef[0];
  }
  return out;
}

TimeSeries read_series(const std::filesystem::path& path) {
  CsvTable t = read_csv(path);
  if (t.header.size() != 2) throw ConfigError(path.string() + ": expected columns t,value");
  if (t.rows.size() < 3) throw ConfigError(path.string() + ": too few samples");
  TimeSeries s;
  s.dt = t.rows[1][0] - t.rows[0][0];
  if (!(s.dt > 0.0)) throw ConfigError(path.string() + ": time column must increase");
  for (std::size_t n = 0; n < t.rows.size(); ++n) {
    const double expect = t.rows[0][0] + static_cast<double>(n) * s.dt;
    if (std::abs(t.rows[n][0] - expect) > 1e-9 * std::max(1.0, std::abs(expect)))
      throw ConfigError(path.string() + ": time samples are not uniform");
    s.values.push_back(t.rows[n][1]);
  }
  return s;
}

void write_series(const std::filesystem::path& path, const TimeSeries& s) {
  std::vector<double> t(s.size());
  for (std::size_t n = 0; n < s.size(); ++n) t[n] = static_cast<double>(n) * s.dt;
  write_csv(path, {"t", "value"}, {t, s.values});
}

}  // namespace memkernel

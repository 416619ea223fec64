#include "memkernel/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include "memkernel/direct.hpp"
#include "memkernel/energy.hpp"
#include "memkernel/errors.hpp"
#include "memkernel/io.hpp"

namespace memkernel {

History::History(const Grid& g)
    : v(g.levels(), g.nodes()),
      vxx(g.levels(), g.nodes()),
      kprime(g.levels(), 0.0),
      k(g.levels(), 0.0),
      y2(g.levels(), 0.0),
      y3(g.levels(), 0.0),
      W(g.levels(), 0.0),
      G(g.levels(), 0.0) {}

namespace {

// Trapezoid convolution at global level a+n split into history and
// window parts. fw/gw hold window values at local levels 0..n; fh/gh
// are the history arrays. For a > 0, local level 0 coincides with
// history level a.
double conv_split(const std::vector<double>& fw, const std::vector<double>& fh,
                  const std::vector<double>& gw, const std::vector<double>& gh, int a, int n,
                  double tail, double dt) {
  if (n == 0 && a == 0) return 0.0;
  double acc = 0.0;
  if (a == 0) {
    acc = 0.5 * (fw[n] * gw[0] + fw[0] * gw[n]);
    for (int s = 1; s < n; ++s) acc += fw[n - s] * gw[s];
    return acc * dt;
  }
  if (n == 0) return tail;
  // s in [0, n-1]: kernel from the window, second factor from history
  acc += 0.5 * fw[n] * gh[0];
  for (int s = 1; s < n; ++s) acc += fw[n - s] * gh[s];
  // s in [a+1, a+n]: kernel from history, second factor from the window
  for (int l = 1; l < n; ++l) acc += fh[n - l] * gw[l];
  acc += 0.5 * fh[0] * gw[n];
  return tail + acc * dt;
}

void conv_split_field(const std::vector<double>& fw, const std::vector<double>& fh, const Field& gw,
                      const Field& gh, int a, int n, std::span<const double> tail, double dt,
                      std::span<double> out) {
  const std::size_t M = out.size();
  std::fill(out.begin(), out.end(), 0.0);
  if (n == 0 && a == 0) return;
  auto axpy = [&](double c, std::span<const double> r) {
    for (std::size_t i = 0; i < M; ++i) out[i] += c * r[i];
  };
  if (a == 0) {
    axpy(0.5 * fw[n], gw.row(0));
    axpy(0.5 * fw[0], gw.row(n));
    for (int s = 1; s < n; ++s) axpy(fw[n - s], gw.row(s));
    for (std::size_t i = 0; i < M; ++i) out[i] *= dt;
    return;
  }
  if (n > 0) {
    axpy(0.5 * fw[n], gh.row(0));
    for (int s = 1; s < n; ++s) axpy(fw[n - s], gh.row(s));
    for (int l = 1; l < n; ++l) axpy(fh[n - l], gw.row(l));
    axpy(0.5 * fh[0], gw.row(n));
    for (std::size_t i = 0; i < M; ++i) out[i] *= dt;
  }
  for (std::size_t i = 0; i < M; ++i) out[i] += tail[i];
}

struct Scratch {
  Field vt, vxx, vxxt;
  std::vector<double> W, Wt, G, Gp;
};

void derived_quantities(const EquivSetup& s, const History& h, const WindowData& w, const Field& v,
                        Scratch& sc) {
  const int m = w.steps, a = w.start, M = s.grid.nodes();
  const double dx = s.grid.dx(), dt = s.grid.dt();
  sc.vt = Field(m + 1, M);
  sc.vxx = Field(m + 1, M);
  sc.vxxt = Field(m + 1, M);
  sc.W.assign(m + 1, 0.0);
  sc.Wt.assign(m + 1, 0.0);
  sc.G.assign(m + 1, 0.0);
  sc.Gp.assign(m + 1, 0.0);
  auto row = [&](int n) -> std::span<const double> { return n >= 0 ? v.row(n) : h.v.row(a - 1); };
  for (int n = 0; n <= m; ++n) {
    auto vt = sc.vt.row(n);
    if (n == 0 && a == 0) {
      std::copy(s.v1.begin(), s.v1.end(), vt.begin());
    } else if (n < m) {
      auto p = row(n - 1), q = row(n + 1);
      for (int i = 0; i < M; ++i) vt[i] = (q[i] - p[i]) / (2.0 * dt);
    } else {
      auto r0 = row(n), r1 = row(n - 1), r2 = row(n - 2);
      for (int i = 0; i < M; ++i) vt[i] = (3.0 * r0[i] - 4.0 * r1[i] + r2[i]) / (2.0 * dt);
    }
    second_diff_into(v.row(n), dx, sc.vxx.row(n));
    second_diff_into(vt, dx, sc.vxxt.row(n));
    const int j = a + n;
    sc.W[n] = dot_trapz(v.row(n), s.rows.phi3, dx);
    sc.Wt[n] = dot_trapz(vt, s.rows.phi3, dx);
    sc.G[n] = G_apply(s, sc.vxx.row(n), s.f[1][j]);
    sc.Gp[n] = G_apply(s, sc.vxxt.row(n), s.f[2][j]);
  }
}

std::vector<double> prefix(const std::vector<double>& d, double start, double dt) {
  std::vector<double> r(d.size(), start);
  for (std::size_t n = 1; n < d.size(); ++n) r[n] = r[n - 1] + 0.5 * dt * (d[n - 1] + d[n]);
  return r;
}

// v on the window from the forcing rows K (levels 0..m-1).
void march_window(const EquivSetup& s, const History& h, const WindowData& w, const Field& K, Field& v) {
  const int m = w.steps, a = w.start;
  DirichletStepper st(s.grid, s.beta);
  if (a == 0) {
    v.set_row(0, s.v0);
    v(0, 0) = 0.0;
    v(0, v.cols() - 1) = 0.0;
    st.start(v.row(0), s.v1, K.row(0), v.row(1));
  } else {
    v.set_row(0, h.v.row(a));
    st.step(h.v.row(a - 1), v.row(0), K.row(0), v.row(1));
  }
  for (int n = 1; n < m; ++n) st.step(v.row(n - 1), v.row(n), K.row(n), v.row(n + 1));
}

// K = -k u0'' - k * v_xx + z'' x / ell on levels 0..m-1.
Field forcing_rows(const EquivSetup& s, const History& h, const WindowData& w,
                   const std::vector<double>& k, const Field& vxx, const std::vector<double>& z2) {
  const int m = w.steps, a = w.start, M = s.grid.nodes();
  const double dt = s.grid.dt();
  Field K(m, M);
  SpaceRow c(M);
  for (int n = 0; n < m; ++n) {
    conv_split_field(k, h.k, vxx, h.vxx, a, n, a == 0 ? std::span<const double>() : w.tail_kv.row(n), dt,
                     c);
    auto Kn = K.row(n);
    for (int i = 0; i < M; ++i)
      Kn[i] = -k[n] * s.rows.u0xx[i] - c[i] + z2[n] * s.rows.x[i] / s.grid.ell;
  }
  return K;
}

}  // namespace

WindowData make_window(const EquivSetup& s, const History& h, int a, int m) {
  const int M = s.grid.nodes();
  const double dt = s.grid.dt();
  if (m < 1 || a + m > s.grid.nt) throw ShapeError("window exceeds the time grid");
  if (a > 0 && m > a) throw ShapeError("window longer than its history");
  WindowData w;
  w.start = a;
  w.steps = m;
  w.tail_kW.assign(m + 1, 0.0);
  w.tail_kG.assign(m + 1, 0.0);
  w.tail_kv = Field(m + 1, M, 0.0);
  if (a == 0) return w;
  // s in [n, a] uses only history; weights 1/2 at s = 0 and s = a + n
  for (int n = 0; n <= m; ++n) {
    double tW = 0.0, tG = 0.0;
    auto tv = w.tail_kv.row(n);
    for (int sidx = n; sidx <= a; ++sidx) {
      const double wt = (sidx == 0 || sidx == a + n) ? 0.5 : 1.0;
      const int j = a + n - sidx;
      tW += wt * h.kprime[j] * h.W[sidx];
      tG += wt * h.kprime[j] * h.G[sidx];
      const double c = wt * h.k[j];
      auto r = h.vxx.row(sidx);
      for (int i = 0; i < M; ++i) tv[i] += c * r[i];
    }
    w.tail_kW[n] = tW * dt;
    w.tail_kG[n] = tG * dt;
    for (int i = 0; i < M; ++i) tv[i] *= dt;
  }
  return w;
}

IterState apply_map(const EquivSetup& s, const History& h, const WindowData& w, const IterState& it,
                    SignVariant sign) {
  const int m = w.steps, a = w.start, M = s.grid.nodes();
  const double dt = s.grid.dt();
  const bool first = a == 0;
  const double sgn = sign == SignVariant::Eq35 ? 1.0 : -1.0;

  Scratch sc;
  derived_quantities(s, h, w, it.v, sc);

  IterState out;
  out.kprime.assign(m + 1, 0.0);
  out.y3.assign(m + 1, 0.0);
  // (1) k' from the previous iterate
  for (int n = 0; n <= m; ++n) {
    if (!first && n == 0) {
      out.kprime[0] = h.kprime[a];
      continue;
    }
    const double c = conv_split(it.kprime, h.kprime, sc.W, h.W, a, n, w.tail_kW[n], dt);
    out.kprime[n] = s.alpha * (s.f[4][a + n] + sgn * sc.Wt[n] - s.k0 * sc.W[n] - c);
  }
  // (2) k by prefix integration
  out.k = prefix(out.kprime, first ? s.k0 : h.k[a], dt);
  // (3) y''' with the new k'
  for (int n = 0; n <= m; ++n) {
    if (!first && n == 0) {
      out.y3[0] = h.y3[a];
      continue;
    }
    const double c = conv_split(out.kprime, h.kprime, sc.G, h.G, a, n, w.tail_kG[n], dt);
    out.y3[n] = sc.Gp[n] - out.kprime[n] * s.ghat0 - s.k0 * sc.G[n] - c;
  }
  // (4) y'' and z''
  out.y2 = prefix(out.y3, first ? s.ypp0 : h.y2[a], dt);
  out.z2.resize(m + 1);
  for (int n = 0; n <= m; ++n) out.z2[n] = s.p * out.y3[n] + s.q * out.y2[n];
  // (5) v from the linear Dirichlet problem
  const Field K = forcing_rows(s, h, w, out.k, sc.vxx, out.z2);
  out.v = Field(m + 1, M);
  march_window(s, h, w, K, out.v);
  return out;
}

IterState initial_iterate(const EquivSetup& s, const History& h, const WindowData& w, InitialGuess guess,
                          double amplitude) {
  const int m = w.steps, a = w.start, M = s.grid.nodes();
  const double dt = s.grid.dt();
  const bool first = a == 0;
  IterState it;
  const double c = guess == InitialGuess::Perturbed ? amplitude : 0.0;
  it.kprime.assign(m + 1, c);
  if (!first) it.kprime[0] = h.kprime[a];
  it.k = prefix(it.kprime, first ? s.k0 : h.k[a], dt);
  it.y3.assign(m + 1, 0.0);
  if (!first) it.y3[0] = h.y3[a];
  it.y2 = prefix(it.y3, first ? s.ypp0 : h.y2[a], dt);
  it.z2.assign(m + 1, 0.0);
  Field vxx(m + 1, M, 0.0);
  if (!first) vxx.set_row(0, h.vxx.row(a));
  const Field K = forcing_rows(s, h, w, it.k, vxx, it.z2);
  it.v = Field(m + 1, M);
  march_window(s, h, w, K, it.v);
  if (guess == InitialGuess::Perturbed) {
    for (int n = 1; n <= m; ++n) {
      const double tn = n * dt;
      for (int i = 1; i + 1 < M; ++i)
        it.v(n, i) += amplitude * tn * tn * std::sin(std::numbers::pi * s.rows.x[i] / s.grid.ell);
    }
  }
  return it;
}

double iterate_distance(const EquivSetup& s, const IterState& a, const IterState& b) {
  const std::size_t R = a.v.rows(), C = a.v.cols();
  if (b.v.rows() != R || b.v.cols() != C || a.kprime.size() != b.kprime.size())
    throw ShapeError("iterates of different shape");
  const double dx = s.grid.dx(), dt = s.grid.dt();
  // include a zero row in front when the window is very short so the
  // one-sided stencils stay defined
  const bool pad = R < 3;
  Field d(R + (pad ? 1 : 0), C, 0.0);
  for (std::size_t n = 0; n < R; ++n)
    for (std::size_t i = 0; i < C; ++i) d(n + (pad ? 1 : 0), i) = a.v(n, i) - b.v(n, i);
  double acc = 0.0;
  for (std::size_t n = 0; n < a.kprime.size(); ++n) {
    const double e = a.kprime[n] - b.kprime[n];
    acc += (n == 0 || n + 1 == a.kprime.size() ? 0.5 : 1.0) * e * e;
  }
  return h2_time_norm(d, dx, dt) + std::sqrt(acc * dt);
}

double roundoff_floor(const EquivSetup& s, const IterState& it) {
  // metric of a relative machine-epsilon perturbation with alternating
  // sign in space and time, the worst case for the difference stencils
  const std::size_t R = it.v.rows(), C = it.v.cols();
  double vmax = 0.0;
  for (double x : it.v.data()) vmax = std::max(vmax, std::abs(x));
  double kmax = 0.0;
  for (double x : it.kprime) kmax = std::max(kmax, std::abs(x));
  Field e(std::max<std::size_t>(R, 3), C, 0.0);
  for (std::size_t n = 0; n < e.rows(); ++n)
    for (std::size_t i = 1; i + 1 < C; ++i)
      e(n, i) = ((n + i) % 2 ? 1.0 : -1.0) * vmax * std::numeric_limits<double>::epsilon();
  const double tau = s.grid.dt() * static_cast<double>(R - 1);
  return h2_time_norm(e, s.grid.dx(), s.grid.dt()) +
         std::sqrt(tau) * kmax * std::numeric_limits<double>::epsilon();
}

WindowResult solve_window(const EquivSetup& s, const History& h, const WindowData& w,
                          const InverseOptions& opts) {
  WindowResult res;
  res.report.start = w.start;
  res.report.steps = w.steps;
  IterState cur = initial_iterate(s, h, w, opts.init, opts.perturb_amplitude);
  double d1 = 0.0, prev = 0.0;
  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    IterState next = apply_map(s, h, w, cur, opts.sign);
    const double d = iterate_distance(s, next, cur);
    res.report.distances.push_back(d);
    res.report.iterations = iter;
    if (iter == 1)
      d1 = d;
    else
      res.report.ratios.push_back(prev > 0.0 ? d / prev : 0.0);
    cur = std::move(next);
    if (!std::isfinite(d) || d > 1e12 * (1.0 + d1))
      throw NoConvergence("iteration diverges on window starting at level " + std::to_string(w.start), iter,
                          res.report.ratios.empty() ? 0.0 : res.report.ratios.back());
    if (d <= opts.tol * (1.0 + d1) || d <= roundoff_floor(s, cur)) {
      res.state = std::move(cur);
      return res;
    }
    prev = d;
  }
  throw NoConvergence("no convergence within " + std::to_string(opts.max_iter) +
                          " iterations on window starting at level " + std::to_string(w.start),
                      opts.max_iter, res.report.ratios.empty() ? 0.0 : res.report.ratios.back());
}

double data_bound_M0(const EquivSetup& s) {
  const double dx = s.grid.dx();
  auto l2 = [&](const SpaceRow& r) { return std::sqrt(dot_trapz(r, r, dx)); };
  const double nv0 = l2(s.v0), nv1 = l2(s.v1), npsi = l2(s.psi), nphi3 = l2(s.rows.phi3);
  const double k0a = std::abs(s.k0) + 1.0;
  const double F = std::abs(s.alpha) * (l2_time_norm(s.f[4]) + nphi3 * (1.0 + nv1 + (1.0 + nv1 + nv0) * k0a));
  const double ip = s.psi_degenerate ? 0.0 : 1.0 / std::abs(s.psi_ell);
  const double inner = ip * (l2_time_norm(s.f[2]) + npsi * (1.0 + nv1)) +
                       ip * k0a * (l2_time_norm(s.f[1]) + npsi * (1.0 + nv1 + nv0)) + std::abs(s.ghat0) * F;
  return h2_row_norm(s.v0, dx) + h2_row_norm(s.v1, dx) + (h2_row_norm(s.rows.u0, dx) + 1.0) * k0a +
         s.q * std::abs(s.ypp0) + (s.p + s.q) * inner + F;
}

int auto_window_steps(const EquivSetup& s) {
  const double M0 = data_bound_M0(s);
  const double tau = std::min(s.grid.T, 1.0 / std::sqrt(1.0 + M0));
  const int m = static_cast<int>(std::lround(tau / s.grid.dt()));
  return std::clamp(m, 2, s.grid.nt);
}

void Reconstruction::write_diagnostics(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "window,iter,distance,ratio,norm_track\n";
  for (const auto& w : windows)
    for (std::size_t j = 0; j < w.distances.size(); ++j)
      out << w.index << ',' << j + 1 << ',' << format_double(w.distances[j]) << ','
          << (j == 0 ? std::string("nan") : format_double(w.ratios[j - 1])) << ','
          << format_double(w.norm_track) << '\n';
}

Reconstruction reconstruct(const EquivSetup& s, const InverseOptions& opts) {
  const Grid& g = s.grid;
  const int NT = g.nt;
  const double dx = g.dx(), dt = g.dt();
  History h(g);
  h.v.set_row(0, s.v0);
  h.v(0, 0) = 0.0;
  h.v(0, g.nodes() - 1) = 0.0;
  second_diff_into(h.v.row(0), dx, h.vxx.row(0));
  h.k[0] = s.k0;
  h.y2[0] = s.ypp0;
  h.W[0] = dot_trapz(h.v.row(0), s.rows.phi3, dx);
  h.G[0] = G_apply(s, h.vxx.row(0), s.f[1][0]);

  Reconstruction rec;
  int nominal = opts.window_steps > 0 ? std::clamp(opts.window_steps, 2, NT) : auto_window_steps(s);
  rec.initial_window_steps = nominal;
  int a = 0, index = 0;
  double prev_track = 0.0;
  while (a < NT) {
    const int rem = NT - a;
    int m = std::min(nominal, rem);
    if (a > 0) m = std::min(m, a);
    if (rem - m == 1) {
      if (m + 1 <= rem && (a == 0 || m + 1 <= a))
        ++m;
      else if (m >= 3)
        --m;
    }
    WindowData wd = make_window(s, h, a, m);
    WindowResult wr;
    try {
      wr = solve_window(s, h, wd, opts);
    } catch (const NoConvergence& e) {
      if (rec.halvings >= opts.max_halvings || m <= 2) throw;
      nominal = std::max(2, m / 2);
      ++rec.halvings;
      rec.warnings.push_back(std::string("window at level ") + std::to_string(a) + " halved to " +
                             std::to_string(nominal) + " steps: " + e.what());
      continue;
    }
    const IterState& st = wr.state;
    for (int n = a == 0 ? 0 : 1; n <= m; ++n) {
      const int j = a + n;
      h.v.set_row(j, st.v.row(n));
      second_diff_into(h.v.row(j), dx, h.vxx.row(j));
      h.kprime[j] = st.kprime[n];
      h.k[j] = st.k[n];
      h.y2[j] = st.y2[n];
      h.y3[j] = st.y3[n];
      h.W[j] = dot_trapz(h.v.row(j), s.rows.phi3, dx);
      h.G[j] = G_apply(s, h.vxx.row(j), s.f[1][j]);
    }
    // a-priori norm track on [0, t_{a+m}]
    Field part(a + m + 1, g.nodes());
    for (int j = 0; j <= a + m; ++j) part.set_row(j, h.v.row(j));
    double acc = 0.0;
    for (int j = 0; j <= a + m; ++j) acc += (j == 0 || j == a + m ? 0.5 : 1.0) * h.kprime[j] * h.kprime[j];
    wr.report.norm_track = h2_time_norm(part, dx, dt) + std::sqrt(acc * dt);
    wr.report.index = index;
    if (index > 0 && wr.report.norm_track > opts.norm_growth_warn * prev_track)
      rec.warnings.push_back("norm track grew by more than " + format_double(opts.norm_growth_warn) +
                             "x at window " + std::to_string(index));
    prev_track = wr.report.norm_track;
    rec.windows.push_back(std::move(wr.report));
    a += m;
    ++index;
  }

  rec.v = h.v;
  rec.kernel = Kernel::from_kprime(TimeSeries{h.kprime, dt}, s.k0);
  rec.y2 = TimeSeries{h.y2, dt};
  rec.y3 = TimeSeries{h.y3, dt};
  rec.yprime = integrate_prefix(rec.y2, s.yp0);
  rec.y = integrate_prefix(rec.yprime, s.y0);
  return rec;
}

}  // namespace memkernel

#include "memkernel/commands.hpp"

#include <cmath>
#include <fstream>

#include "memkernel/direct.hpp"
#include "memkernel/energy.hpp"
#include "memkernel/equivalence.hpp"
#include "memkernel/errors.hpp"
#include "memkernel/io.hpp"
#include "memkernel/noise.hpp"

namespace memkernel {

namespace fs = std::filesystem;

namespace {

fs::path prepare_output(const RunConfig& cfg, const CommandFlags& flags) {
  const fs::path dir = flags.out ? *flags.out : fs::path(cfg.output);
  fs::create_directories(dir);
  std::ofstream(dir / "config.resolved.ini") << cfg.resolved();
  return dir;
}

std::vector<double> times(const Grid& g) {
  std::vector<double> t(g.levels());
  for (int n = 0; n < g.levels(); ++n) t[n] = g.t(n);
  return t;
}

void write_f(const fs::path& path, const Grid& g, const TimeSeries& f) {
  write_csv(path, {"t", "f"}, {times(g), f.values});
}

TimeSeries synthesize(const RunConfig& cfg, const ProblemData& pd) {
  return synthesize_f(pd, cfg.k_true_expr(), cfg.richardson ? SynthRefine::Richardson : SynthRefine::None);
}

TimeSeries read_measurement(const std::string& path, const Grid& g) {
  TimeSeries f = read_series(path);
  if (static_cast<int>(f.size()) != g.levels())
    throw ConfigError(path + ": " + std::to_string(f.size()) + " samples, grid needs nt+1 = " +
                      std::to_string(g.levels()));
  if (std::abs(f.dt - g.dt()) > 1e-9 * g.dt()) throw ConfigError(path + ": time step does not match T/nt");
  f.dt = g.dt();
  return f;
}

double l2_time(const std::vector<double>& a, double dt) {
  double acc = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) acc += (n == 0 || n + 1 == a.size() ? 0.5 : 1.0) * a[n] * a[n];
  return std::sqrt(acc * dt);
}

void report_compat(const CompatibilityReport& rep, const fs::path& dir, std::ostream& out) {
  rep.write(dir / "compat.csv");
  out << "compatibility=" << (rep.all_pass() ? "pass" : "fail") << '\n';
}

}  // namespace

int cmd_direct(const RunConfig& cfg, const CommandFlags& flags, std::ostream& out, std::ostream&) {
  const ProblemData pd = cfg.problem();
  const Expr k = cfg.k_true_expr();
  const fs::path dir = prepare_output(cfg, flags);
  const Grid& g = pd.grid;
  const DirectSolution sol = solve_direct(pd, Kernel::from_expr(k, g));
  write_field(dir / "u.csv", g, sol.u, flags.field_format);
  write_csv(dir / "y.csv", {"t", "y", "yprime"}, {times(g), sol.y.values, sol.yprime.values});
  write_f(dir / "f.csv", g, sol.f);
  const VTransform vt = v_from_u(pd, sol.u, sol.y, sol.yprime);
  energy_series(vt.v, pd.beta, g).write(dir / "energy.csv");
  out << "f_end=" << format_double(sol.f.values.back()) << '\n';
  return kExitOk;
}

int cmd_synth(const RunConfig& cfg, const CommandFlags& flags, std::ostream& out, std::ostream&) {
  const ProblemData pd = cfg.problem();
  const Expr k = cfg.k_true_expr();
  const fs::path dir = prepare_output(cfg, flags);
  const TimeSeries f = synthesize(cfg, pd);
  write_f(dir / "f.csv", pd.grid, f);
  write_f(dir / "f_noisy.csv", pd.grid, add_noise(f, cfg.noise_sigma, cfg.noise_seed));
  SetupOptions so;
  so.strict = false;
  so.smoothing_window = cfg.smoothing;
  const EquivSetup s = build_setup(pd, f, so);
  report_compat(check_compatibility(pd, s, k.eval(0.0)), dir, out);
  return kExitOk;
}

int cmd_invert(const RunConfig& cfg, const CommandFlags& flags, std::ostream& out, std::ostream& err) {
  const bool has_f = cfg.f || cfg.f_file;
  if (flags.twin && !cfg.k_true) throw ConfigError("--twin needs data.k_true");
  if (has_f && cfg.k_true)
    throw ConfigError("invert takes exactly one of data.k_true (twin) or data.f / data.f_file (measurement)");
  if (!has_f && !cfg.k_true) throw ConfigError("invert needs data.k_true or data.f / data.f_file");
  const bool twin = cfg.k_true.has_value();

  const ProblemData pd = cfg.problem();
  const Grid& g = pd.grid;
  const fs::path dir = prepare_output(cfg, flags);
  SetupOptions so;
  so.smoothing_window = cfg.smoothing;
  EquivSetup s;
  std::optional<double> declared_k0;
  if (twin) {
    const TimeSeries f = add_noise(synthesize(cfg, pd), cfg.noise_sigma, cfg.noise_seed);
    write_f(dir / "f.csv", g, f);
    s = build_setup(pd, f, so);
    declared_k0 = cfg.k_true_expr().eval(0.0);
  } else if (cfg.f) {
    s = build_setup(pd, parse_expr(*cfg.f, "t"), so);
  } else {
    s = build_setup(pd, read_measurement(*cfg.f_file, g), so);
  }

  const CompatibilityReport rep = check_compatibility(pd, s, declared_k0);
  report_compat(rep, dir, out);
  if (!rep.all_pass()) {
    if (!(flags.force || cfg.force)) {
      std::string bad;
      for (const auto& l : rep.lines)
        if (!l.pass) bad += (bad.empty() ? "" : ", ") + l.name;
      throw CompatibilityFailed("data fail the compatibility check: " + bad);
    }
    err << "warning: compatibility check failed, continuing because of --force\n";
  }

  InverseOptions io = cfg.inverse;
  if (flags.sign) io.sign = *flags.sign;
  const Reconstruction rec = reconstruct(s, io);
  for (const auto& w : rec.warnings) err << "warning: " << w << '\n';

  const std::vector<double> t = times(g);
  write_csv(dir / "k.csv", {"t", "k", "kprime"}, {t, rec.kernel.k.values, rec.kernel.kprime.values});
  write_csv(dir / "y.csv", {"t", "y", "yprime", "y2", "y3"},
            {t, rec.y.values, rec.yprime.values, rec.y2.values, rec.y3.values});
  write_field(dir / "v.csv", g, rec.v, flags.field_format);
  rec.write_diagnostics(dir / "diagnostics.csv");
  out << "windows=" << rec.windows.size() << "\nhalvings=" << rec.halvings << '\n';

  if (twin) {
    const Expr k = cfg.k_true_expr();
    std::vector<double> kt(t.size()), e(t.size());
    for (std::size_t n = 0; n < t.size(); ++n) {
      kt[n] = k.eval(t[n]);
      e[n] = std::abs(rec.kernel.k[n] - kt[n]);
    }
    write_csv(dir / "error.csv", {"t", "k_true", "k_rec", "abs_err"}, {t, kt, rec.kernel.k.values, e});
    const double ne = l2_time(e, g.dt()), nk = l2_time(kt, g.dt());
    // absolute error when the true kernel vanishes
    const double rel = nk > 0.0 ? ne / nk : ne;
    out << "abs_L2_error=" << format_double(ne) << '\n' << "rel_L2_error=" << format_double(rel) << '\n';
  }
  return kExitOk;
}

int cmd_check(const RunConfig& cfg, const CommandFlags& flags, std::ostream& out, std::ostream& err) {
  const ProblemData pd = cfg.problem();
  const fs::path dir = prepare_output(cfg, flags);
  SetupOptions so;
  so.strict = false;
  so.smoothing_window = cfg.smoothing;
  EquivSetup s;
  std::optional<double> declared_k0;
  if (cfg.f) {
    s = build_setup(pd, parse_expr(*cfg.f, "t"), so);
  } else if (cfg.f_file) {
    s = build_setup(pd, read_measurement(*cfg.f_file, pd.grid), so);
  } else if (cfg.k_true) {
    s = build_setup(pd, synthesize(cfg, pd), so);
    declared_k0 = cfg.k_true_expr().eval(0.0);
  } else {
    err << "note: no measurement given, checking f = 0\n";
    s = build_setup(pd, parse_expr("0", "t"), so);
  }
  report_compat(check_compatibility(pd, s, declared_k0), dir, out);
  return kExitOk;
}

int cmd_energy(const RunConfig& cfg, const CommandFlags& flags, std::ostream& out, std::ostream&) {
  const ProblemData pd = cfg.problem();
  const Grid& g = pd.grid;
  for (const char* which : {"u0", "u1"}) {
    const Expr& e = which[1] == '0' ? pd.u0 : pd.u1;
    if (std::abs(e.eval(0.0)) > 1e-10 || std::abs(e.eval(g.ell)) > 1e-10)
      throw ConfigError(std::string("energy needs data.") + which + " to vanish at both ends");
  }
  const fs::path dir = prepare_output(cfg, flags);
  const SpaceRow v0 = sample_row(pd.u0, g), v1 = sample_row(pd.u1, g);
  const Field K(g.levels(), g.nodes());
  const Field v = solve_linear_dirichlet(g, pd.beta, v0, v1, K);
  const EnergyTrack e = energy_series(v, pd.beta, g);
  e.write(dir / "energy.csv");
  double drift = 0.0;
  for (double x : e.E1) drift = std::max(drift, std::abs(x - e.E1[0]));
  if (e.E1[0] > 0.0) drift /= e.E1[0];
  out << "E1_drift=" << format_double(drift) << '\n'
      << "estimate_margin=" << format_double(check_estimate(v, v0, v1, K, g)) << '\n';
  return kExitOk;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ParseError*>(&e)) return kExitConfig;
  if (dynamic_cast<const CompatibilityFailed*>(&e) || dynamic_cast<const BoundaryIncompatible*>(&e))
    return kExitCompatibility;
  if (dynamic_cast<const NoConvergence*>(&e)) return kExitNoConvergence;
  return kExitFailure;
}

int run_command(const std::string& name, const RunConfig& cfg, const CommandFlags& flags, std::ostream& out,
                std::ostream& err) {
  try {
    if (name == "direct") return cmd_direct(cfg, flags, out, err);
    if (name == "synth") return cmd_synth(cfg, flags, out, err);
    if (name == "invert") return cmd_invert(cfg, flags, out, err);
    if (name == "check") return cmd_check(cfg, flags, out, err);
    if (name == "energy") return cmd_energy(cfg, flags, out, err);
    err << "error: unknown command '" << name << "'\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace memkernel

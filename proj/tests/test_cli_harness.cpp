#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "memkernel/commands.hpp"
#include "memkernel/config.hpp"
#include "memkernel/errors.hpp"
#include "memkernel/io.hpp"
#include "memkernel/noise.hpp"

using namespace memkernel;
namespace fs = std::filesystem;

namespace {

std::string config_error(const std::string& text) {
  try {
    parse_config(text, "t.ini");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("memkernel_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const char* kSmall = "[grid]\nnx = 30\nnt = 60\n[data]\nk_true = 0.5*exp(-t)\n";

}  // namespace

TEST_CASE("config parsing") {
  const RunConfig c = parse_config(
      "# twin\n[problem]\nbeta = 0.2\n[grid]\nnx = 40 # inline\nnt = 80\n[data]\nk_true = 0.4*cos(2*t)\n"
      "[inverse]\nsign_variant = eq41\ninit = perturbed\n[noise]\nsigma = 1e-7\nseed = 9\n",
      "t.ini");
  CHECK(c.beta == 0.2);
  CHECK(c.nx == 40);
  CHECK(c.nt == 80);
  CHECK(*c.k_true == "0.4*cos(2*t)");
  CHECK(c.inverse.sign == SignVariant::Eq41);
  CHECK(c.inverse.init == InitialGuess::Perturbed);
  CHECK(c.noise_seed == 9);
  CHECK(c.set.at("grid.nx") == 5);
  CHECK(c.q == 1.0);
  // the echo parses back to the same settings
  const RunConfig back = parse_config(c.resolved(), "echo");
  CHECK(back.resolved() == c.resolved());
  CHECK(back.noise_sigma == 1e-7);
}

TEST_CASE("config errors name line and key") {
  CHECK(config_error("[grid]\nnx = ten\n").find("t.ini:2: grid.nx") != std::string::npos);
  CHECK(config_error("[grid]\nnx = 1\n").find("t.ini:2: grid.nx") != std::string::npos);
  CHECK(config_error("[grid]\nnz = 4\n").find("t.ini:2: grid.nz") != std::string::npos);
  CHECK(config_error("[mystery]\n").find("t.ini:1") != std::string::npos);
  CHECK(config_error("nx = 4\n").find("t.ini:1") != std::string::npos);
  CHECK(config_error("[grid]\nnx = 4\nnx = 5\n").find("t.ini:3: grid.nx") != std::string::npos);
  CHECK(config_error("[problem]\nbeta =\n").find("t.ini:2: problem.beta") != std::string::npos);
  CHECK(config_error("[inverse]\nsign_variant = eq99\n").find("inverse.sign_variant") != std::string::npos);
  CHECK(config_error("[inverse]\nsmoothing = 4\n").find("inverse.smoothing") != std::string::npos);
  CHECK(!config_error("[data]\nf = t\nf_file = f.csv\n").empty());
  CHECK(config_error("[data]\nu0 = sin(x\n").find("t.ini:2: data.u0") != std::string::npos);
}

TEST_CASE("exit codes") {
  std::ostringstream out, err;
  CommandFlags flags;
  flags.out = scratch("codes");
  CHECK(run_command("direct", parse_config("[data]\nu0 = 1 + x\nk_true = 0\n"), flags, out, err) == kExitCompatibility);
  CHECK(run_command("direct", parse_config("[grid]\nnx = 10\n"), flags, out, err) == kExitConfig);
  CHECK(run_command("bogus", parse_config(""), flags, out, err) == kExitConfig);
  CHECK(run_command("invert", parse_config("[data]\nf = 0\n[grid]\nnx = 20\nnt = 40\n"), flags, out, err) ==
        kExitCompatibility);
  CHECK(run_command("invert", parse_config("[grid]\nnx = 10\nnt = 20\n[data]\nk_true = 0.5\n[inverse]\nmax_iter = 1\nmax_halvings = 0\nwindow_steps = 20\nforce = true\n"),
                    flags, out, err) == kExitNoConvergence);
  CHECK(exit_code_for(ParseError("x", 0)) == kExitConfig);
  CHECK(exit_code_for(NonFinite("x", 3)) == kExitFailure);
  CHECK(run_command("check", parse_config("[grid]\nnx = 20\nnt = 40\n"), flags, out, err) == kExitOk);
  CHECK(out.str().find("compatibility=fail") != std::string::npos);
  fs::remove_all(*flags.out);
}

TEST_CASE("noise") {
  const TimeSeries f{{0.0, 1.0, -2.0, 0.5}, 0.1};
  const TimeSeries same = add_noise(f, 0.0, 3);
  CHECK(same.values == f.values);
  const TimeSeries a = add_noise(f, 1e-3, 3), b = add_noise(f, 1e-3, 3), c = add_noise(f, 1e-3, 4);
  CHECK(a.values == b.values);
  CHECK(a.values != c.values);
  for (std::size_t n = 0; n < f.size(); ++n) CHECK(std::abs(a[n] - f[n]) < 1e-2);

  Xorshift64Star rng(1);
  double m = 0.0, v = 0.0;
  const int N = 100000;
  for (int i = 0; i < N; ++i) {
    const double x = rng.normal();
    m += x;
    v += x * x;
  }
  m /= N;
  v = v / N - m * m;
  CHECK(std::abs(m) < 0.02);
  CHECK(std::abs(v - 1.0) < 0.02);
}

TEST_CASE("synth and twin invert write their files") {
  const fs::path dir = scratch("files");
  CommandFlags flags;
  flags.out = dir;
  std::ostringstream out, err;
  const RunConfig cfg = parse_config(kSmall);
  REQUIRE(run_command("synth", cfg, flags, out, err) == kExitOk);
  for (const char* f : {"f.csv", "f_noisy.csv", "compat.csv", "config.resolved.ini"}) CHECK(fs::exists(dir / f));
  CHECK(slurp(dir / "f.csv") == slurp(dir / "f_noisy.csv"));
  const CsvTable t = read_csv(dir / "f.csv");
  CHECK(t.header == std::vector<std::string>{"t", "f"});
  CHECK(t.rows.size() == 61);

  flags.twin = true;
  REQUIRE(run_command("invert", cfg, flags, out, err) == kExitOk);
  for (const char* f : {"k.csv", "y.csv", "v.csv", "diagnostics.csv", "error.csv"}) CHECK(fs::exists(dir / f));
  CHECK(out.str().find("rel_L2_error=") != std::string::npos);

  // measurement mode from the file just written
  const std::string mcfg = "[grid]\nnx = 30\nnt = 60\n[data]\nf_file = " + (dir / "f.csv").string() + "\n";
  flags.twin = false;
  flags.out = dir / "meas";
  CHECK(run_command("invert", parse_config(mcfg), flags, out, err) == kExitOk);
  const CsvTable a = read_csv(dir / "k.csv"), b = read_csv(dir / "meas" / "k.csv");
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t n = 0; n < a.rows.size(); ++n) CHECK(a.rows[n][1] == doctest::Approx(b.rows[n][1]).epsilon(1e-9));
  fs::remove_all(dir);
}

TEST_CASE("reruns are byte-identical") {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  std::ostringstream out, err;
  const RunConfig cfg = parse_config(std::string(kSmall) + "[noise]\nsigma = 1e-6\nseed = 11\n");
  for (const fs::path& d : {a, b}) {
    CommandFlags flags;
    flags.out = d;
    REQUIRE(run_command("synth", cfg, flags, out, err) == kExitOk);
    flags.twin = true;
    flags.force = true;
    REQUIRE(run_command("invert", cfg, flags, out, err) == kExitOk);
  }
  for (const auto& e : fs::directory_iterator(a)) CHECK_MESSAGE(slurp(e.path()) == slurp(b / e.path().filename()), e.path());
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("energy command") {
  const fs::path dir = scratch("energy");
  CommandFlags flags;
  flags.out = dir;
  std::ostringstream out, err;
  CHECK(run_command("energy", parse_config("[grid]\nnx = 50\nnt = 100\n"), flags, out, err) == kExitConfig);
  CHECK(run_command("energy", parse_config("[grid]\nnx = 50\nnt = 100\n[data]\nu0 = sin(pi*x)\nu1 = 0\n"), flags, out,
                    err) == kExitOk);
  CHECK(out.str().find("E1_drift=") != std::string::npos);
  CHECK(fs::exists(dir / "energy.csv"));
  fs::remove_all(dir);
}

TEST_CASE("sample configs load") {
  const char* dir = std::getenv("MEMKERNEL_CONFIG_DIR");
  if (!dir) return;
  int n = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() != ".ini") continue;
    const RunConfig c = load_config(e.path());
    CHECK_NOTHROW(c.problem());
    ++n;
  }
  CHECK(n >= 5);
}

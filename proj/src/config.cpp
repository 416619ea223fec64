#include "memkernel/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "memkernel/errors.hpp"
#include "memkernel/io.hpp"

namespace memkernel {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Ctx {
  std::string source;
  int line;
  std::string key;
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(source + ":" + std::to_string(line) + ": " + key + ": " + what);
  }
};

double to_double(const Ctx& c, const std::string& v) {
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) c.fail("expected a number, got '" + v + "'");
  return out;
}

double to_positive(const Ctx& c, const std::string& v) {
  const double d = to_double(c, v);
  if (!(d > 0.0)) c.fail("must be positive");
  return d;
}

long long to_int(const Ctx& c, const std::string& v) {
  long long out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) c.fail("expected an integer, got '" + v + "'");
  return out;
}

bool to_bool(const Ctx& c, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  c.fail("expected true or false, got '" + v + "'");
}

std::string to_expr(const Ctx& c, const std::string& v, const char* var) {
  try {
    (void)parse_expr(v, var);
  } catch (const ParseError& e) {
    c.fail(e.what());
  }
  return v;
}

using Setter = std::function<void(RunConfig&, const Ctx&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"problem.beta", [](RunConfig& r, const Ctx& c, const std::string& v) { r.beta = to_positive(c, v); }},
      {"problem.p", [](RunConfig& r, const Ctx& c, const std::string& v) { r.p = to_positive(c, v); }},
      {"problem.q", [](RunConfig& r, const Ctx& c, const std::string& v) { r.q = to_positive(c, v); }},
      {"problem.ell", [](RunConfig& r, const Ctx& c, const std::string& v) { r.ell = to_positive(c, v); }},
      {"problem.T", [](RunConfig& r, const Ctx& c, const std::string& v) { r.T = to_positive(c, v); }},
      {"grid.nx",
       [](RunConfig& r, const Ctx& c, const std::string& v) {
         const auto n = to_int(c, v);
         if (n < 3 || n > 100000) c.fail("must lie in [3, 100000]");
         r.nx = static_cast<int>(n);
       }},
      {"grid.nt",
       [](RunConfig& r, const Ctx& c, const std::string& v) {
         const auto n = to_int(c, v);
         if (n < 8 || n > 1000000) c.fail("must lie in [8, 1000000]");
         r.nt = static_cast<int>(n);
       }},
      {"data.u0", [](RunConfig& r, const Ctx& c, const std::string& v) { r.u0 = to_expr(c, v, "x"); }},
      {"data.u1", [](RunConfig& r, const Ctx& c, const std::string& v) { r.u1 = to_expr(c, v, "x"); }},
      {"data.phi", [](RunConfig& r, const Ctx& c, const std::string& v) { r.phi = to_expr(c, v, "x"); }},
      {"data.k_true", [](RunConfig& r, const Ctx& c, const std::string& v) { r.k_true = to_expr(c, v, "t"); }},
      {"data.f", [](RunConfig& r, const Ctx& c, const std::string& v) { r.f = to_expr(c, v, "t"); }},
      {"data.f_file", [](RunConfig& r, const Ctx&, const std::string& v) { r.f_file = v; }},
      {"inverse.tol", [](RunConfig& r, const Ctx& c, const std::string& v) { r.inverse.tol = to_positive(c, v); }},
      {"inverse.max_iter",
       [](RunConfig& r, const Ctx& c, const std::string& v) {
         const auto n = to_int(c, v);
         if (n < 1) c.fail("must be at least 1");
         r.inverse.max_iter = static_cast<int>(n);
       }},
      {"inverse.window_steps",
       [](RunConfig& r, const Ctx& c, const std::string& v) {
         const auto n = to_int(c, v);
         if (n < 0) c.fail("must be 0 (automatic) or positive");
         r.inverse.window_steps = static_cast<int>(n);
       }},
      {"inverse.max_halvings",
       [](RunConfig& r, const Ctx& c, const std::string& v) {
         const auto n = to_int(c, v);
         if (n < 0 || n > 30) c.fail("must lie in [0, 30]");
         r.inverse.max_halvings = static_cast<int>(n);
       }},
      {"inverse.sign_variant",
       [](RunConfig& r, const Ctx& c, const std::string& v) {
         if (v == "eq35")
           r.inverse.sign = SignVariant::Eq35;
         else if (v == "eq41")
           r.inverse.sign = SignVariant::Eq41;
         else
           c.fail("expected eq35 or eq41");
       }},
      {"inverse.init",
       [](RunConfig& r, const Ctx& c, const std::string& v) {
         if (v == "default")
           r.inverse.init = InitialGuess::Default;
         else if (v == "perturbed")
           r.inverse.init = InitialGuess::Perturbed;
         else
           c.fail("expected default or perturbed");
       }},
      {"inverse.perturb_amplitude",
       [](RunConfig& r, const Ctx& c, const std::string& v) { r.inverse.perturb_amplitude = to_double(c, v); }},
      {"inverse.norm_growth_warn",
       [](RunConfig& r, const Ctx& c, const std::string& v) { r.inverse.norm_growth_warn = to_positive(c, v); }},
      {"inverse.smoothing",
       [](RunConfig& r, const Ctx& c, const std::string& v) {
         const auto n = to_int(c, v);
         if (n != 0 && (n < 5 || n % 2 == 0)) c.fail("must be 0 or an odd window >= 5");
         r.smoothing = static_cast<int>(n);
       }},
      {"inverse.force", [](RunConfig& r, const Ctx& c, const std::string& v) { r.force = to_bool(c, v); }},
      {"synth.richardson", [](RunConfig& r, const Ctx& c, const std::string& v) { r.richardson = to_bool(c, v); }},
      {"noise.sigma",
       [](RunConfig& r, const Ctx& c, const std::string& v) {
         const double s = to_double(c, v);
         if (!(s >= 0.0)) c.fail("must be nonnegative");
         r.noise_sigma = s;
       }},
      {"noise.seed",
       [](RunConfig& r, const Ctx& c, const std::string& v) {
         std::uint64_t out = 0;
         const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
         if (res.ec != std::errc() || res.ptr != v.data() + v.size()) c.fail("expected an unsigned integer");
         r.noise_seed = out;
       }},
      {"output.dir", [](RunConfig& r, const Ctx&, const std::string& v) { r.output = v; }},
  };
  return table;
}

const char* sign_name(SignVariant s) { return s == SignVariant::Eq35 ? "eq35" : "eq41"; }

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw, section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError(source + ":" + std::to_string(line) + ": malformed section header");
      section = trim(s.substr(1, s.size() - 2));
      bool known = false;
      for (const auto& [k, _] : setters())
        if (k.compare(0, section.size() + 1, section + ".") == 0) known = true;
      if (!known) throw ConfigError(source + ":" + std::to_string(line) + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError(source + ":" + std::to_string(line) + ": expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (section.empty())
      throw ConfigError(source + ":" + std::to_string(line) + ": " + key + ": key outside of a section");
    const std::string full = section + "." + key;
    Ctx ctx{source, line, full};
    const auto it = setters().find(full);
    if (it == setters().end()) ctx.fail("unknown key");
    if (cfg.set.count(full)) ctx.fail("duplicate key (first set on line " + std::to_string(cfg.set[full]) + ")");
    if (value.empty()) ctx.fail("empty value");
    it->second(cfg, ctx, value);
    cfg.set[full] = line;
  }
  if (cfg.f && cfg.f_file) throw ConfigError(source + ": data.f and data.f_file are mutually exclusive");
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  RunConfig cfg = parse_config(ss.str(), path.string());
  if (cfg.f_file && std::filesystem::path(*cfg.f_file).is_relative())
    cfg.f_file = (path.parent_path() / *cfg.f_file).lexically_normal().string();
  return cfg;
}

ProblemData RunConfig::problem() const {
  ProblemData pd;
  pd.beta = beta;
  pd.p = p;
  pd.q = q;
  pd.grid = Grid::make(ell, T, nx, nt);
  pd.u0 = parse_expr(u0, "x");
  pd.u1 = parse_expr(u1, "x");
  pd.phi = parse_expr(phi, "x");
  return pd;
}

Expr RunConfig::k_true_expr() const {
  if (!k_true) throw ConfigError("data.k_true is required for this command");
  return parse_expr(*k_true, "t");
}

std::string RunConfig::resolved() const {
  std::ostringstream o;
  auto d = [](double v) { return format_double(v); };
  o << "[problem]\n"
    << "beta = " << d(beta) << "\np = " << d(p) << "\nq = " << d(q) << "\nell = " << d(ell) << "\nT = " << d(T)
    << "\n\n[grid]\nnx = " << nx << "\nnt = " << nt << "\n\n[data]\nu0 = " << u0 << "\nu1 = " << u1
    << "\nphi = " << phi << "\n";
  if (k_true) o << "k_true = " << *k_true << "\n";
  if (f) o << "f = " << *f << "\n";
  if (f_file) o << "f_file = " << *f_file << "\n";
  o << "\n[inverse]\ntol = " << d(inverse.tol) << "\nmax_iter = " << inverse.max_iter
    << "\nwindow_steps = " << inverse.window_steps << "\nmax_halvings = " << inverse.max_halvings
    << "\nsign_variant = " << sign_name(inverse.sign)
    << "\ninit = " << (inverse.init == InitialGuess::Default ? "default" : "perturbed")
    << "\nperturb_amplitude = " << d(inverse.perturb_amplitude)
    << "\nnorm_growth_warn = " << d(inverse.norm_growth_warn) << "\nsmoothing = " << smoothing
    << "\nforce = " << (force ? "true" : "false") << "\n\n[synth]\nrichardson = " << (richardson ? "true" : "false")
    << "\n\n[noise]\nsigma = " << d(noise_sigma) << "\nseed = " << noise_seed << "\n\n[output]\ndir = " << output
    << "\n";
  return o.str();
}

}  // namespace memkernel

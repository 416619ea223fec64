#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "memkernel/direct.hpp"
#include "memkernel/inverse.hpp"
#include "memkernel/problem.hpp"

namespace memkernel {

// Resolved run configuration. Every key has a default except the optional
// expressions; `set` records which keys the file supplied.
struct RunConfig {
  double beta = 0.1, p = 1.0, q = 1.0, ell = 1.0, T = 1.0;
  int nx = 200, nt = 400;

  std::string u0 = "sin(1.5707963267948966*x)";
  std::string u1 = "0.5*x + 0.8*x^3";
  std::string phi = "x^3*(1 - x)^3";
  std::optional<std::string> k_true;  // function of t
  std::optional<std::string> f;       // function of t
  std::optional<std::string> f_file;  // CSV with columns t,f

  InverseOptions inverse;
  int smoothing = 0;
  bool force = false;

  bool richardson = true;

  double noise_sigma = 0.0;  // relative to max |f|
  std::uint64_t noise_seed = 1;

  std::string output = "out";

  std::map<std::string, int> set;  // "section.key" -> line

  ProblemData problem() const;  // parses the expressions
  Expr k_true_expr() const;
  // Text in the same format, every key spelled out.
  std::string resolved() const;
};

// Flat key = value lines grouped under [section] headers; '#' starts a
// comment. Errors name the source, line and key.
RunConfig parse_config(const std::string& text, const std::string& source = "config");
RunConfig load_config(const std::filesystem::path& path);

}  // namespace memkernel

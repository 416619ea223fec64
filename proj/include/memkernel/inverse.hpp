#pragma once

#include <string>
#include <vector>

#include "memkernel/equivalence.hpp"
#include "memkernel/grid.hpp"
#include "memkernel/volterra.hpp"

namespace memkernel {

// Sign in front of int v_t phi''' in the k' equation. Eq35 is the form
// obtained by differentiating the phi'-paired equation; Eq41 flips it.
enum class SignVariant { Eq35, Eq41 };

enum class InitialGuess { Default, Perturbed };

struct InverseOptions {
  double tol = 1e-10;
  int max_iter = 50;
  int window_steps = 0;  // 0 selects the length from the data bound
  int max_halvings = 6;
  SignVariant sign = SignVariant::Eq35;
  InitialGuess init = InitialGuess::Default;
  double perturb_amplitude = 1.0;
  double norm_growth_warn = 10.0;
};

// Unknowns on one window, local time levels 0..m.
struct IterState {
  Field v;
  std::vector<double> kprime;
  std::vector<double> y3;  // y'''
  std::vector<double> z2;  // z'' = p y''' + q y''
  std::vector<double> k, y2;
};

// History seen by a window starting at global level a.
struct History {
  Field v, vxx;
  std::vector<double> kprime, k, y2, y3, W, G;
  explicit History(const Grid& g);
};

struct WindowData {
  int start = 0;  // global level a
  int steps = 0;  // m
  // tails of the three memory terms that only involve history
  std::vector<double> tail_kW, tail_kG;
  Field tail_kv;  // (steps+1) x nodes
};

WindowData make_window(const EquivSetup& s, const History& h, int start, int steps);

// One application of the contraction map.
IterState apply_map(const EquivSetup& s, const History& h, const WindowData& w, const IterState& it,
                    SignVariant sign = SignVariant::Eq35);

IterState initial_iterate(const EquivSetup& s, const History& h, const WindowData& w,
                          InitialGuess guess = InitialGuess::Default, double amplitude = 1.0);

// sum_j ||d_t^j (v1 - v2)||_{L2 H2} + ||k1' - k2'||_{L2}
double iterate_distance(const EquivSetup& s, const IterState& a, const IterState& b);

// Distance reached by rounding noise alone on this iterate.
double roundoff_floor(const EquivSetup& s, const IterState& it);

struct WindowReport {
  int index = 0;
  int start = 0;
  int steps = 0;
  int iterations = 0;
  std::vector<double> distances;
  std::vector<double> ratios;
  double norm_track = 0.0;
};

struct WindowResult {
  IterState state;
  WindowReport report;
};

// Picard iteration until d <= max(tol (1 + d(s1, s0)), roundoff floor);
// throws NoConvergence.
WindowResult solve_window(const EquivSetup& s, const History& h, const WindowData& w,
                          const InverseOptions& opts);

struct Reconstruction {
  Kernel kernel;
  Field v;
  TimeSeries y, yprime, y2, y3;
  std::vector<WindowReport> windows;
  std::vector<std::string> warnings;
  int halvings = 0;
  int initial_window_steps = 0;

  void write_diagnostics(const std::filesystem::path& path) const;
};

// Data bound of the local existence argument with all generic constants 1.
double data_bound_M0(const EquivSetup& s);
int auto_window_steps(const EquivSetup& s);

Reconstruction reconstruct(const EquivSetup& s, const InverseOptions& opts = {});

}  // namespace memkernel

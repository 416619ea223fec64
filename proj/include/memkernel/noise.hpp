#pragma once

#include <cstdint>

#include "memkernel/volterra.hpp"

namespace memkernel {

// xorshift64* (Marsaglia shifts 12, 25, 27; multiplier 0x2545F4914F6CDD1D).
// The seed goes through one splitmix64 step so that 0 is usable.
class Xorshift64Star {
 public:
  explicit Xorshift64Star(std::uint64_t seed);
  std::uint64_t next();
  double uniform();  // in (0, 1), 53 random bits
  double normal();   // Box-Muller, the second variate is kept for the next call

 private:
  std::uint64_t s_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// f + sigma max|f| N(0, 1), sample by sample in time order.
TimeSeries add_noise(const TimeSeries& f, double sigma_rel, std::uint64_t seed);

}  // namespace memkernel

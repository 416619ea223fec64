#include "memkernel/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace memkernel {

Xorshift64Star::Xorshift64Star(std::uint64_t seed) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  s_ = z ^ (z >> 31);
  if (s_ == 0) s_ = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t Xorshift64Star::next() {
  s_ ^= s_ >> 12;
  s_ ^= s_ << 25;
  s_ ^= s_ >> 27;
  return s_ * 0x2545F4914F6CDD1DULL;
}

double Xorshift64Star::uniform() {
  return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
}

double Xorshift64Star::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double r = std::sqrt(-2.0 * std::log(uniform()));
  const double a = 2.0 * std::numbers::pi * uniform();
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

TimeSeries add_noise(const TimeSeries& f, double sigma_rel, std::uint64_t seed) {
  TimeSeries out = f;
  if (sigma_rel == 0.0) return out;
  double amp = 0.0;
  for (double v : f.values) amp = std::max(amp, std::abs(v));
  Xorshift64Star rng(seed);
  for (double& v : out.values) v += sigma_rel * amp * rng.normal();
  return out;
}

}  // namespace memkernel

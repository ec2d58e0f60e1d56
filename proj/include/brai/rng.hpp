#pragma once

// Seedable, splittable random streams. A child stream is derived from the
// parent's seed and a label, so sibling branches get independent streams
// regardless of how much randomness the parent has consumed.

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include "brai/common.hpp"

namespace brai {

namespace detail {
inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

class SplitRng {
 public:
  explicit SplitRng(uint64_t seed) : seed_(seed), state_(seed) {
    // Decorrelate trivially related seeds before the first draw.
    detail::splitmix64(state_);
    detail::splitmix64(state_);
  }

  uint64_t seed() const { return seed_; }

  SplitRng child(std::string_view label) const {
    uint64_t h = fnv1a64(label.data(), label.size());
    uint64_t mix = seed_ ^ (h | 1ULL);
    detail::splitmix64(mix);
    return SplitRng(mix);
  }

  uint64_t next_u64() { return detail::splitmix64(state_); }

  // Uniform in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [0, bound).
  uint64_t next_below(uint64_t bound) {
    return static_cast<uint64_t>((static_cast<__uint128_t>(next_u64()) * bound) >> 64);
  }

  double next_normal() {
    double u1 = next_double();
    double u2 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  // Marsaglia-Tsang; boosted for alpha < 1.
  double next_gamma(double alpha) {
    if (alpha < 1.0) {
      double u = next_double();
      while (u <= 0.0) u = next_double();
      return next_gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
    }
    const double d = alpha - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = next_normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      double u = next_double();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

 private:
  uint64_t seed_;
  uint64_t state_;
};

}  // namespace brai

// SPDX-License-Identifier: Apache-2.0
//
// Deterministic random number generation for reproducible Monte-Carlo runs.
//
// Every stochastic routine in the library takes an explicit 64-bit seed and
// owns its generator, so trials can execute on any number of workers and
// still produce bit-identical results. Sub-streams are derived with
// derive_seed(root, a, b, c): the harness uses (config seed, drop index,
// channel index) plus a purpose tag, so no two streams ever collide.

#pragma once

#include <complex>
#include <cstdint>

namespace hmasim {

// SplitMix64 step; used both as a mixer and to expand seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Collision-resistant stream derivation: hash the root and up to three
// stream coordinates through SplitMix64.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t s = root;
  std::uint64_t h = splitmix64(s);
  s = h ^ (a + 0x9e3779b97f4a7c15ULL);
  h = splitmix64(s);
  s = h ^ (b + 0xd1b54a32d192ed03ULL);
  h = splitmix64(s);
  s = h ^ (c + 0x8cb92ba72f3d8dd7ULL);
  return splitmix64(s);
}

// xoshiro256++ with SplitMix64 seeding. Self-contained so results do not
// depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    for (auto& word : state_) word = splitmix64(seed);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (no caching; fixed draw count per call).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

  // Circularly-symmetric complex normal CN(0, 1).
  std::complex<double> cnormal() {
    const double re = normal();
    const double im = normal();
    constexpr double inv_sqrt2 = 0.70710678118654752440;
    return {re * inv_sqrt2, im * inv_sqrt2};
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t state_[4];
};

}  // namespace hmasim

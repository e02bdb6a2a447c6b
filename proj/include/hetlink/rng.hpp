#pragma once

#include <cmath>
#include <cstdint>

namespace hetlink {

// SplitMix64 stream. Small, fast, and trivially splittable: every sampling
// site derives its own stream from (seed, index) so parallel and serial
// execution draw identical numbers regardless of scheduling.
struct SplitMix64 {
  std::uint64_t state = 0;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). Modulo bias is < 2^-40 for n < 2^24.
  std::uint64_t uniform_index(std::uint64_t n) { return next() % n; }

  // Standard normal via Box-Muller (fresh pair each call, second value
  // discarded: keeps streams stateless beyond `state`).
  double normal() {
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }
};

// Mixes a seed with a stream index (and an optional tag) into a new seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index, std::uint64_t tag = 0) {
  SplitMix64 s(seed ^ (0x9e3779b97f4a7c15ull * (index + 1)) ^ (tag << 32 | tag));
  return s.next();
}

}  // namespace hetlink

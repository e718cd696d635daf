#pragma once

#include <cstdint>
#include <random>

namespace snl {

/// Seeded pseudo-random source used by every randomized operation.
///
/// mt19937_64 has a fixed output specification, and uniform doubles are built
/// from the top 53 bits directly, so a given seed produces the same stream on
/// every platform regardless of the standard library's distribution
/// implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform index in [0, n). Lemire multiply-shift, no modulo bias.
  int uniform_index(int n) {
    return static_cast<int>((static_cast<unsigned __int128>(next_u64()) *
                             static_cast<unsigned __int128>(n)) >> 64);
  }

  /// Derives an independent stream id from (seed, a, b). splitmix64 finalizer
  /// applied twice; used to give Monte Carlo trials order-independent seeds.
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    auto fin = [](std::uint64_t z) {
      z += 0x9e3779b97f4a7c15ULL;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      return z ^ (z >> 31);
    };
    return fin(fin(seed ^ fin(a)) ^ fin(b ^ 0xd1b54a32d192ed03ULL));
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace snl

#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>

namespace mlpsched {

/// Seeded 64-bit Mersenne Twister (std::mt19937_64, whose output sequence is
/// fixed by the C++ standard) with a portable bounded draw.
///
/// std::uniform_int_distribution is implementation-defined, so bounded
/// integers are drawn by rejection: reject raw outputs below
/// (2^64 - bound) mod bound, then reduce modulo bound. The result is exactly
/// uniform and identical on every conforming toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, bound). bound must be > 0.
  std::uint64_t uniform_below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("uniform_below: bound is 0");
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t x = engine_();
      if (x >= threshold) return x % bound;
    }
  }

  /// Uniform in [lo, hi], inclusive.
  std::uint64_t uniform_in(std::uint64_t lo, std::uint64_t hi) {
    if (lo > hi) throw std::invalid_argument("uniform_in: empty range");
    if (lo == 0 && hi == UINT64_MAX) return engine_();
    return lo + uniform_below(hi - lo + 1);
  }

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; derives independent sub-seeds from (seed, index).
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace mlpsched

#pragma once

#include <cstdint>
#include <random>

namespace alpdc {

/// Seeded generator with portable draws. std::*_distribution output varies
/// between standard libraries, so draws are derived from raw mt19937_64 words.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, bound), bound > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  /// Uniform real in [0, 1).
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform real in [-1, 1).
  double symmetric() { return 2.0 * unit() - 1.0; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace alpdc

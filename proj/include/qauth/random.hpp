#pragma once

#include <cstdint>
#include <random>

namespace qauth {

/// Deterministic pseudo-random stream keyed by (master_seed, stream_id).
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The std:: distributions are not (their algorithms are
/// implementation-defined), so every draw is mapped from raw 64-bit output
/// here. Identical (seed, stream) pairs give identical draws on every
/// platform.
class RandomSource {
 public:
  RandomSource(std::uint64_t master_seed, std::uint64_t stream_id)
      : engine_(mix(master_seed, stream_id)) {}

  std::uint64_t next_u64() { return engine_(); }

  std::uint8_t bit() { return static_cast<std::uint8_t>(engine_() >> 63); }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, n). n must be non-zero.
  std::uint64_t below(std::uint64_t n) {
    // Reject the low partial bucket so every residue is equally likely.
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = engine_();
      if (r >= threshold) return r % n;
    }
  }

 private:
  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(seed ^ splitmix64(stream ^ 0x5851f42d4c957f2dULL));
  }

  std::mt19937_64 engine_;
};

}  // namespace qauth

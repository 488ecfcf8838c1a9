#pragma once

#include <cstdint>

namespace pclqr {

/// SplitMix64 generator. Chosen over std::mt19937 because its output is fully
/// specified by the algorithm, so seeded runs reproduce bit-for-bit on any
/// platform and standard library. State is a single 64-bit word.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform double in [-1, 1).
  double uniform_pm1() { return 2.0 * uniform01() - 1.0; }

  /// Deterministic sub-seed for stream `stream` of a master seed, so
  /// per-sample work can be split without correlating streams.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    SplitMix64 g(seed ^ (0x632be59bd9b4e019ULL + stream));
    g.next();
    return g.next();
  }

 private:
  std::uint64_t state_;
};

}  // namespace pclqr

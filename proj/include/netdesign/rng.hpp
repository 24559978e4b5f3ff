#pragma once

#include <cstdint>

namespace netdesign {

// Deterministic 64-bit generator (splitmix64). Used wherever the solver
// needs randomness so results are reproducible across platforms and
// standard-library versions; std::mt19937 distributions are not portable.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n), n > 0. Multiply-shift mapping; the bias is
  /// below 2^-64 per draw, irrelevant at the sizes used here.
  std::uint64_t below(std::uint64_t n) {
    auto wide = static_cast<unsigned __int128>(next());
    return static_cast<std::uint64_t>((wide * n) >> 64);
  }

  /// Independent child stream, for decorrelating subsystems without
  /// coupling their draw counts.
  SplitMix64 fork() { return SplitMix64(next() ^ 0x632be59bd9b4e019ull); }

 private:
  std::uint64_t state_;
};

}  // namespace netdesign

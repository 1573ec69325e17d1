#pragma once

#include <cstdint>

namespace neuralshell {

// SplitMix64: tiny, fast, platform-stable generator.  Used for weight
// initialization and sample draws so that runs are reproducible bit-for-bit
// across standard libraries (std::uniform_real_distribution is not).
struct SplitMix64 {
  std::uint64_t state = 0;

  explicit SplitMix64(std::uint64_t seed = 0) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }
};

// Mixes two words into one seed (e.g. base seed and iteration index).
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  SplitMix64 s(a ^ (0x9e3779b97f4a7c15ull + (b << 1)));
  s.next();
  return s.next() ^ b;
}

}  // namespace neuralshell

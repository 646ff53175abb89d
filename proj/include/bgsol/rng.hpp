#pragma once

#include <bit>
#include <cstdint>
#include <random>

namespace bgsol {

// SplitMix64 step; used only to spread seed material.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/**
 Deterministic random stream: std::mt19937_64 seeded through SplitMix64.
 Independent streams are derived from (master seed, stream index), one per
 chain/trial, so parallel runs are reproducible bit for bit regardless of
 scheduling.  All draws go through our own conversions (never through
 distribution objects, whose algorithms are implementation-defined), so a
 given seed produces the same sequence on every platform.
 */
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) { reseed(seed, 0); }
  RngStream(std::uint64_t master, std::uint64_t stream) { reseed(master, stream); }

  static RngStream derive(std::uint64_t master, std::uint64_t stream) {
    return RngStream(master, stream);
  }

  std::uint64_t next_u64() { return eng_(); }

  // Uniform in [0,1) with 53 significant bits.
  double next_double() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return next_double() < p; }

  // Inclusive bounds; masked rejection avoids modulo bias.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (lo >= hi) return lo;
    const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
    const std::uint64_t mask = std::bit_ceil(range) - 1;
    for (;;) {
      const std::uint64_t v = eng_() & mask;
      if (v < range) return lo + static_cast<std::int64_t>(v);
    }
  }

 private:
  void reseed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t s = master ^ (0xD1B54A32D192ED03ULL * (stream + 1));
    std::uint32_t material[16];
    for (int w = 0; w < 8; ++w) {
      const std::uint64_t v = splitmix64(s);
      material[2 * w] = static_cast<std::uint32_t>(v);
      material[2 * w + 1] = static_cast<std::uint32_t>(v >> 32);
    }
    std::seed_seq seq(material, material + 16);
    eng_.seed(seq);
  }

  std::mt19937_64 eng_;
};

}  // namespace bgsol

#pragma once

#include <cmath>
#include <cstdint>

namespace svogs::rng {

// Counter-based pseudo-randomness.
//
// Every draw applies the SplitMix64 output function to a key assembled from
// (seed, stream, round, index). There is no evolving generator state, so
//   * any single draw can be replayed in isolation,
//   * draws can be made in any order (or in parallel) with identical results,
//   * sub-streams stay aligned when unrelated configuration changes — e.g.
//     changing the mini-batch size b does not shift the snapshot coin flips,
//     because batch indices and snapshot coins live on different streams.
//
// The uniform integer draw reduces a 64-bit word modulo n; the bias is
// < n / 2^64 and irrelevant at the scales simulated here.

enum class Stream : std::uint64_t {
  kBatch = 1,      // mini-batch client indices, one draw per (round, slot)
  kSnapshot = 2,   // Bernoulli(p) snapshot coin, one draw per round
  kPartition = 3,  // data-partition shuffle
  kSynthetic = 4,  // synthetic data / instance generation
  kSpectral = 5,   // start vectors for power iterations
  kProbe = 6,      // random evaluation points in tests and verifiers
};

// SplitMix64 output function (Steele, Lea, Flood; the well-known constants).
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t draw_u64(std::uint64_t seed, Stream stream,
                              std::uint64_t round, std::uint64_t index) {
  std::uint64_t h = splitmix64(seed ^ (0xA5A5A5A5A5A5A5A5ULL *
                                       static_cast<std::uint64_t>(stream)));
  h = splitmix64(h ^ round);
  return splitmix64(h ^ index);
}

// Uniform double in [0, 1) with 53 random mantissa bits.
inline double draw_unit(std::uint64_t seed, Stream stream, std::uint64_t round,
                        std::uint64_t index) {
  return static_cast<double>(draw_u64(seed, stream, round, index) >> 11) *
         0x1.0p-53;
}

// Uniform integer in {0, ..., n-1}.
inline int draw_index(std::uint64_t seed, Stream stream, std::uint64_t round,
                      std::uint64_t index, int n) {
  return static_cast<int>(draw_u64(seed, stream, round, index) %
                          static_cast<std::uint64_t>(n));
}

// Standard normal via Box-Muller; consumes the (2*index, 2*index+1) pair of
// unit draws so consecutive indices give independent values.
inline double draw_normal(std::uint64_t seed, Stream stream,
                          std::uint64_t round, std::uint64_t index) {
  const double u1 =
      1.0 - draw_unit(seed, stream, round, 2 * index);  // (0, 1]
  const double u2 = draw_unit(seed, stream, round, 2 * index + 1);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.14159265358979323846 * u2);
}

}  // namespace svogs::rng

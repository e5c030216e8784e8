#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace kbsa {

// Deterministic seed derivation: splitmix64 over (base_seed, replication,
// purpose). Streams are independent of thread scheduling by construction.
inline uint64_t split_seed(uint64_t base, uint64_t replication,
                           uint64_t purpose) {
  uint64_t z = base + 0x9e3779b97f4a7c15ULL * (replication + 1) +
               0xbf58476d1ce4e5b9ULL * (purpose + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Per-purpose generators for one replication.
struct RngStreams {
  std::mt19937_64 measure;
  std::mt19937_64 gradient;
  std::mt19937_64 direction;
};

inline RngStreams make_streams(uint64_t base_seed, uint64_t replication = 0) {
  return RngStreams{std::mt19937_64(split_seed(base_seed, replication, 0)),
                    std::mt19937_64(split_seed(base_seed, replication, 1)),
                    std::mt19937_64(split_seed(base_seed, replication, 2))};
}

inline double draw_uniform01(std::mt19937_64& rng) {
  // 53-bit mantissa in (0, 1].
  return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
}

// Box-Muller without caching; two engine words per draw, so the stream
// position is independent of library internals.
inline double draw_std_normal(std::mt19937_64& rng) {
  double u1 = draw_uniform01(rng);
  double u2 = draw_uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace kbsa

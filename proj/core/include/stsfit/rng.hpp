#pragma once

#include <cstdint>
#include <random>

namespace stsfit {

/// SplitMix64 mixing step; used to derive independent stream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for the (a, b) substream of base_seed. Streams are independent of
/// evaluation order, so parallel producers give schedule-independent output.
inline std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t a, std::uint64_t b = 0) {
  return splitmix64(splitmix64(splitmix64(base_seed) ^ a) ^ b);
}

inline std::mt19937_64 make_engine(std::uint64_t seed) { return std::mt19937_64(seed); }

/// Identifier recorded in heatmap metadata for provenance.
inline const char* rng_algorithm_id() { return "mt19937_64+splitmix64"; }

}  // namespace stsfit

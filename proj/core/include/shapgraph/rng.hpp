#pragma once

#include <cstdint>
#include <random>

namespace shapgraph {

inline std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for an independent stream identified by (seed, stream). Used so that
// sample t of a Monte-Carlo run draws the same numbers no matter which
// worker evaluates it.
inline std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream) {
  return SplitMix64(SplitMix64(seed) ^ SplitMix64(stream + 0x632be59bd9b4e019ULL));
}

using Rng = std::mt19937_64;

inline Rng MakeRng(std::uint64_t seed, std::uint64_t stream) {
  return Rng(DeriveSeed(seed, stream));
}

}  // namespace shapgraph

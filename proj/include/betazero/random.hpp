#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace betazero {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives a child stream seed from a master seed and up to two indices.
/// Distinct (a, b) pairs give statistically independent streams.
constexpr std::uint64_t deriveSeed(std::uint64_t master, std::uint64_t a,
                                   std::uint64_t b = 0) {
  return splitmix64(splitmix64(splitmix64(master) ^ a) + 0x632be59bd9b4e019ULL * (b + 1));
}

/// Uniform double in [0, 1) built from the top 53 bits of one draw.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline int uniformIndex(Rng& rng, int n) {
  return static_cast<int>(uniform01(rng) * n);
}

inline double standardNormal(Rng& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

/// Draws an index with probability proportional to `weights`.
/// Falls back to the last positive-weight index on rounding slop.
inline int sampleCategorical(std::span<const double> weights, Rng& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  double u = uniform01(rng) * total;
  int last = -1;
  for (int i = 0; i < static_cast<int>(weights.size()); ++i) {
    if (weights[i] <= 0.0) continue;
    last = i;
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  return last;
}

}  // namespace betazero

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace bbo {

// All randomness in the library flows through Rng. The helpers below are
// hand-rolled (rather than std:: distributions) so that a seed produces the
// same stream regardless of standard-library version.
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

// Derives an independent stream, e.g. one per dispatched query.
inline Rng derive_rng(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t h = seed ^ (0x9e3779b97f4a7c15ULL + stream * 0xbf58476d1ce4e5b9ULL);
  h ^= h >> 30;
  h *= 0xbf58476d1ce4e5b9ULL;
  h ^= h >> 27;
  h *= 0x94d049bb133111ebULL;
  h ^= h >> 31;
  return Rng(h);
}

// Uniform on [0, 1).
inline double uniform01(Rng& rng) {
  return (rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Uniform integer on {lo, ..., hi} inclusive.
inline std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi) {
  if (hi <= lo) return lo;
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  // Rejection to avoid modulo bias.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() / span * span;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return lo + static_cast<std::int64_t>(v % span);
}

inline std::size_t uniform_index(Rng& rng, std::size_t count) {
  return static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(count) - 1));
}

// Standard normal via Box-Muller (no cached spare, keeps streams predictable).
inline double standard_normal(Rng& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = uniform_index(rng, i);
    std::swap(items[i - 1], items[j]);
  }
}

// Number of coordinates touched by one mutation: Geometric(1/2) on {0,1,...}
// (mean 1), clamped to at least one so every mutant differs from its parent.
inline int geometric_mutation_count(Rng& rng) {
  int k = 0;
  while (uniform01(rng) < 0.5) ++k;
  return k > 0 ? k : 1;
}

}  // namespace bbo

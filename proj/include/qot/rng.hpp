// Deterministic sampling utilities.
//
// std::mt19937_64 is bit-reproducible across platforms, but the standard
// distributions are not; every draw here goes through our own mapping so
// that a (seed, index) pair always yields the same value stream.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace qot {

using RngEngine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Decorrelated per-stream seed for (base_seed, stream_index).
inline std::uint64_t stream_seed(std::uint64_t base_seed, std::uint64_t stream_index) {
  return splitmix64(splitmix64(base_seed) ^ splitmix64(0xA0761D6478BD642FULL + stream_index));
}

inline RngEngine make_engine(std::uint64_t base_seed, std::uint64_t stream_index) {
  return RngEngine(stream_seed(base_seed, stream_index));
}

/// Unbiased draw from [0, n). n must be nonzero.
inline std::uint64_t u64_below(RngEngine& eng, std::uint64_t n) {
  for (;;) {
    const std::uint64_t x = eng();
    const std::uint64_t r = x % n;
    if (x - r <= ~std::uint64_t{0} - (n - 1)) return r;
  }
}

/// Inclusive integer range.
inline std::int64_t uniform_int(RngEngine& eng, std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(u64_below(eng, static_cast<std::uint64_t>(hi - lo + 1)));
}

/// Uniform in [0, 1) with 53-bit resolution.
inline double uniform01(RngEngine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

inline double uniform_real(RngEngine& eng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(eng);
}

/// Standard normal via Box-Muller; consumes exactly two engine draws.
inline double normal01(RngEngine& eng) {
  double u1 = uniform01(eng);
  const double u2 = uniform01(eng);
  if (u1 <= 0.0) u1 = 0x1.0p-53;  // log(0) guard
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

template <typename T>
const T& pick(RngEngine& eng, const std::vector<T>& values) {
  return values[u64_below(eng, values.size())];
}

/// Fisher-Yates; unlike std::shuffle the result is implementation-independent.
template <typename T>
void shuffle(RngEngine& eng, std::vector<T>& values) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(u64_below(eng, i));
    std::swap(values[i - 1], values[j]);
  }
}

}  // namespace qot

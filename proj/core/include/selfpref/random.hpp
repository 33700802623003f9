#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace selfpref {

// Seed derivation and draws that are bit-reproducible across standard library
// implementations. std::*_distribution output is implementation-defined, so
// the few draws the library needs are written against the raw engine.

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

// Independent substream seed for (master, key...). Order of keys matters.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t key) noexcept {
  return splitmix64(splitmix64(master) ^ splitmix64(key + 0x632BE59BD9B4E019ull));
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view key) noexcept {
  return derive_seed(master, fnv1a64(key));
}

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed) { return Engine(seed); }

// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

// Unbiased integer in [0, n) by rejection.
inline std::uint64_t uniform_index(Engine& eng, std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do {
    x = eng();
  } while (x >= limit);
  return x % n;
}

inline bool bernoulli(Engine& eng, double p) { return uniform01(eng) < p; }

// Box-Muller, one variate per call (two uniforms consumed).
inline double standard_normal(Engine& eng) {
  const double u1 = std::max(uniform01(eng), 0x1.0p-60);
  const double u2 = uniform01(eng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

template <typename T>
void shuffle(std::vector<T>& v, Engine& eng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_index(eng, i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace selfpref

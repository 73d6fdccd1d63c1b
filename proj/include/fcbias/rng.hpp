#pragma once

// Portable random streams. All stochastic components draw from std::mt19937_64,
// whose output sequence is fixed by the standard, and map raw 64-bit words to
// bounded integers / unit reals with the helpers below instead of the
// implementation-defined std::*_distribution classes. Results therefore
// reproduce bit-for-bit across compilers and platforms.

#include <cstdint>
#include <random>
#include <string_view>

namespace fcbias {

using Rng = std::mt19937_64;

/// 64-bit FNV-1a over raw bytes.
constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// SplitMix64 finalizer; used to decorrelate derived seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Sub-seed for a named component, e.g. derive_seed(seed, "bootstrap").
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view component) noexcept {
  return splitmix64(seed ^ splitmix64(fnv1a64(component)));
}

/// Sub-seed for the index-th independent stream of a component.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(seed) + index);
}

/// Uniform integer in [0, n) by rejection sampling (unbiased). n must be > 0.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

/// Uniform real in [0, 1) with 53 random bits.
inline double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace fcbias

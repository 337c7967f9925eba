#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace fopkit {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Independent stream derived from the top-level seed. Every random consumer
/// takes its own named stream so that, e.g., changing the trial count never
/// perturbs initialization.
constexpr std::uint64_t sub_seed(std::uint64_t seed, std::string_view stream) {
  return mix64(seed ^ mix64(fnv1a(stream)));
}

inline constexpr std::string_view kDataStream = "data";
inline constexpr std::string_view kInitStream = "init";
inline constexpr std::string_view kShuffleStream = "shuffle";
inline constexpr std::string_view kTrialStream = "trials";

// Uniform in [0, 1) from the top 53 bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

// Box-Muller; one draw per call.
inline double standard_normal(Rng& rng) {
  double u1 = uniform01(rng);
  while (u1 == 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

// Uniform integer in [0, n) by rejection.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return static_cast<std::size_t>(x % n);
}

// Fisher-Yates with an explicit uniform draw so results do not depend on the
// standard library's std::shuffle.
template <typename Range>
void seeded_shuffle(Range& items, Rng& rng) {
  using std::swap;
  for (std::size_t i = std::size(items); i > 1; --i) swap(items[i - 1], items[uniform_index(rng, i)]);
}

}  // namespace fopkit

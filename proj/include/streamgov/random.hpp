/**
 * @file random.hpp
 * @brief Portable counter-based random numbers.
 *
 * Draw k of a stream is splitmix64(seed + (k + 1) * golden_gamma). Everything here is
 * integer arithmetic plus IEEE doubles, so sequences are identical on every platform,
 * unlike the distributions in <random>.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace streamgov {

inline constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives an independent stream seed from a parent seed and up to two indices.
inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) noexcept {
  return splitmix64(splitmix64(seed ^ splitmix64(a + 0x632be59bd9b4e019ULL)) ^ splitmix64(b + 0x9e3779b97f4a7c15ULL));
}

class CounterRng {
 public:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  explicit constexpr CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}

  constexpr std::uint64_t next() noexcept { return splitmix64(seed_ + (++counter_) * kGamma); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound), bound > 0 (scaled 53-bit draw; bias negligible for small bounds).
  std::uint64_t below(std::uint64_t bound) noexcept {
    const auto v = static_cast<std::uint64_t>(uniform() * static_cast<double>(bound));
    return v < bound ? v : bound - 1;
  }

  /// Standard normal via Box-Muller (cosine branch; one normal per two uniforms).
  double normal() noexcept {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  [[nodiscard]] constexpr std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_{0};
};

}  // namespace streamgov

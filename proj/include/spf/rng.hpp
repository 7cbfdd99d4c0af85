#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

namespace spf {

// Counter-based pseudo-random stream (splitmix64). Output i depends only on
// (seed, i), so identical seeds replay identical streams on any platform and
// derived streams can be drawn concurrently without coordination.
constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Stable 64-bit hash for deriving independent sub-streams from a base seed.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return mix64(mix64(base + kGoldenGamma) ^ (stream * kGoldenGamma + 1));
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                    std::uint64_t b) {
  return derive_seed(derive_seed(base, a), b);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += kGoldenGamma;
    return mix64(state_);
  }

  /// Uniform double in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound). Lemire reduction, exact.
  std::uint64_t uniform_below(std::uint64_t bound) {
    auto m = static_cast<unsigned __int128>(next_u64()) * bound;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < bound) {
      const std::uint64_t cutoff = -bound % bound;
      while (lo < cutoff) {
        m = static_cast<unsigned __int128>(next_u64()) * bound;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Standard normal via Box-Muller (always consumes two uniforms).
  double next_gaussian() {
    const double u1 = 1.0 - next_double();  // (0, 1]
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Circularly symmetric complex normal with E|z|^2 = 1.
  std::complex<double> next_cgaussian() {
    const double u1 = 1.0 - next_double();
    const double u2 = next_double();
    const double r = std::sqrt(-std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(theta), r * std::sin(theta)};
  }

  /// Uniform phase factor e^{i theta}.
  std::complex<double> next_phase() {
    const double theta = 2.0 * std::numbers::pi * next_double();
    return {std::cos(theta), std::sin(theta)};
  }

 private:
  std::uint64_t state_;
};

/// k distinct indices drawn uniformly from [0, n), returned ascending.
inline std::vector<std::int64_t> sample_support(std::int64_t n, std::int64_t k,
                                                Rng& rng) {
  std::vector<std::int64_t> idx(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  for (std::int64_t i = 0; i < k; ++i) {
    const auto j =
        i + static_cast<std::int64_t>(rng.uniform_below(
                static_cast<std::uint64_t>(n - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace spf

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace mevdro {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed for an independent stream, a pure function of (seed, stream, index).
/// Replications use index so results do not depend on scheduling.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream,
                                    std::uint64_t index = 0) {
  return mix64(mix64(seed ^ mix64(stream)) + mix64(index + 0x632BE59BD9B4E019ULL));
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) {
  return Rng(derive_seed(seed, stream, index));
}

/// Named streams so that every consumer of a seed draws from its own sequence.
namespace stream {
inline constexpr std::uint64_t kData = 1;
inline constexpr std::uint64_t kConfigurations = 2;
inline constexpr std::uint64_t kAdversaryTrain = 3;
inline constexpr std::uint64_t kAdversaryEval = 4;
inline constexpr std::uint64_t kProjection = 5;
inline constexpr std::uint64_t kTruth = 6;
inline constexpr std::uint64_t kModelPreset = 7;
inline constexpr std::uint64_t kComponents = 8;
}  // namespace stream

/// Uniform on the open interval (0, 1) with 53 random bits.
inline double uniform_open(Rng& rng) {
  for (;;) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    if (u > 0.0) return u;
  }
}

inline double standard_exponential(Rng& rng) { return -std::log(uniform_open(rng)); }

/// log of a Gamma(shape, 1) variate. For shape < 1 the identity
/// Gamma(shape) = Gamma(shape + 1) * U^(1/shape) is taken in log space so that
/// tiny shapes do not underflow to zero.
inline double log_gamma_variate(Rng& rng, double shape) {
  if (shape >= 1.0) {
    std::gamma_distribution<double> g(shape, 1.0);
    return std::log(g(rng));
  }
  std::gamma_distribution<double> g(shape + 1.0, 1.0);
  const double base = std::log(g(rng));
  return base + std::log(uniform_open(rng)) / shape;
}

}  // namespace mevdro

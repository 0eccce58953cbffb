#pragma once

#include <cstdint>
#include <random>

#include "lmpc_hr/model.hpp"

namespace lmpc_hr {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to spread user seeds over the engine state.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Stream for one method: splitmix64(seed ^ golden * (tag + 1)). Every entry
/// point (sample, benchmark, validate) uses the same derivation, so a method's
/// sample sequence depends only on the master seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, MethodTag tag) {
  const auto k = static_cast<std::uint64_t>(tag) + 1;
  return splitmix64(master ^ (0x9E3779B97F4A7C15ull * k));
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

/// Uniform on [lo, hi]; returns lo when the interval is a point.
inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

/// Uniform direction on the unit sphere in R^n as a normalized Gaussian.
inline Vector sample_unit_direction(Rng& rng, Index n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector d(n);
  for (;;) {
    for (Index i = 0; i < n; ++i) d(i) = normal(rng);
    const double norm = d.norm();
    if (norm >= 1e-12) return d / norm;
  }
}

}  // namespace lmpc_hr

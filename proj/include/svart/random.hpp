#pragma once

#include <cstdint>
#include <random>

#include "svart/data.hpp"

namespace svart {

// Engine used everywhere. Identical seeds give identical streams on a given
// standard library implementation.
using Rng = std::mt19937_64;

// Independent stream for chain `stream` of a run seeded with `seed`.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

inline double standard_normal(Rng& rng) { return std::normal_distribution<double>{}(rng); }

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>{}(rng); }

// Gamma with the given shape and RATE (mean shape / rate).
inline double gamma_rate(Rng& rng, double shape, double rate) {
  return std::gamma_distribution<double>{shape, 1.0 / rate}(rng);
}

inline double exponential_mean(Rng& rng, double mean) {
  return std::exponential_distribution<double>{1.0 / mean}(rng);
}

// Unit-scale Student t via its normal / gamma scale mixture:
// w ~ Gamma(lambda/2, rate lambda/2), eps = z / sqrt(w).
inline double student_t(Rng& rng, double lambda) {
  const double w = gamma_rate(rng, 0.5 * lambda, 0.5 * lambda);
  return standard_normal(rng) / std::sqrt(w);
}

inline Vector standard_normal_vector(Rng& rng, Eigen::Index n) {
  Vector z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = standard_normal(rng);
  return z;
}

}  // namespace svart

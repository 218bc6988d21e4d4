#pragma once

// Deterministic randomness for the whole library. Every stochastic routine takes a
// SplitRng by reference; independent streams are derived from one master seed with
// derive_key, so adding consumers never perturbs unrelated draws.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>

#include "errors.hpp"

namespace numclust {

// splitmix64 finalizer. Bijective, good avalanche, standard constants.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stream key for (master, a, b). Distinct (a, b) pairs under one master give
// uncorrelated mt19937_64 seeds.
inline std::uint64_t derive_key(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t h = mix64(master);
  h = mix64(h ^ mix64(a));
  h = mix64(h ^ mix64(b));
  return h;
}

class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed) : gen_(seed) {}

  static SplitRng derive(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
    return SplitRng(derive_key(master, a, b));
  }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53 random bits. Platform-stable: no distribution objects.
  double next_unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller, cosine branch only. Exactly two u64 per draw,
  // which keeps consumption counts predictable for stream-stability tests.
  double next_normal() {
    double u1 = next_unit();
    double u2 = next_unit();
    while (u1 <= 0.0) u1 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Unbiased integer in [0, n) by rejection sampling.
  std::size_t next_below(std::size_t n) {
    if (n == 0) throw InvalidArgument("next_below: n must be positive");
    const std::uint64_t bound = n;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x = gen_();
    while (x >= limit) x = gen_();
    return static_cast<std::size_t>(x % bound);
  }

  // Index i with probability w[i] / sum(w). Weights must be non-negative with a
  // positive, finite total.
  std::size_t next_weighted(std::span<const double> w) {
    double total = 0.0;
    for (double v : w) {
      if (v < 0.0 || !std::isfinite(v)) throw InvalidArgument("next_weighted: bad weight");
      total += v;
    }
    if (total <= 0.0) throw InvalidArgument("next_weighted: weights sum to zero");
    const double target = next_unit() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
      acc += w[i];
      if (target < acc) return i;
    }
    return w.size() - 1;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace numclust

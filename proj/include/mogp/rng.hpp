/*!
 * This file is part of mogp, a C++ library for multi-output Gaussian process
 * models with heterogeneous likelihoods.
 *
 * Licensed under the Apache License Version 2.0. See LICENSE file in the
 * project root for license information.
 */
#ifndef MOGP_RNG_HPP
#define MOGP_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace mogp {

/// Seeded random stream. Substreams are derived from a root seed and a
/// stream name so that independent components (data generation, model
/// initialization, mini-batching) draw from decorrelated sequences that are
/// reproducible given the root seed alone.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : base_(seed), engine_(seed) {}

  Rng(std::uint64_t seed, std::string_view stream)
      : base_(mix(seed, fnv1a(stream))), engine_(base_) {}

  /// Derive a named substream; the parent stream is not advanced.
  Rng substream(std::string_view name) const {
    return Rng(mix(base_, fnv1a(name)));
  }

  std::mt19937_64& engine() { return engine_; }

  double normal(double mean = 0.0, double stddev = 1.0) {
    std::normal_distribution<double> d(mean, stddev);
    return d(engine_);
  }

  double uniform(double lo = 0.0, double hi = 1.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    return d(engine_);
  }

  /// Uniform integer in [0, n).
  std::uint64_t index(std::uint64_t n) {
    std::uniform_int_distribution<std::uint64_t> d(0, n - 1);
    return d(engine_);
  }

  bool bernoulli(double p) {
    std::bernoulli_distribution d(p);
    return d(engine_);
  }

  long poisson(double rate) {
    std::poisson_distribution<long> d(rate);
    return d(engine_);
  }

private:
  static std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
    return h;
  }

  // splitmix64 finalizer over the combined words
  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ull * (b | 1ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t base_;
  std::mt19937_64 engine_;
};

} // namespace mogp

#endif

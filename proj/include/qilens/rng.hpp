// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

namespace qilens {

// Counting RNG with a self-contained Poisson sampler. std::poisson_distribution
// is implementation-defined, so sampling goes through explicit inversion
// (small means) and Hormann's PTRS transformed rejection (large means); the
// draw sequence is then fixed by the mt19937_64 stream alone.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Independent stream for a parallel worker.
  static Rng for_worker(std::uint64_t seed, std::uint64_t worker) {
    return Rng(mix(seed, worker));
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  std::uint64_t poisson(double mean);

  // Bernoulli draw.
  bool bernoulli(double p) { return uniform() < p; }

private:
  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    // splitmix64 finalizer over the pair
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t poisson_inversion(double mean);
  std::uint64_t poisson_ptrs(double mean);

  std::mt19937_64 eng_;
};

}  // namespace qilens

// SPDX-License-Identifier: Apache-2.0
#include "qilens/rng.hpp"

#include <cmath>

#include "qilens/errors.hpp"

namespace qilens {

std::uint64_t Rng::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    throw ValidationError("poisson: mean must be finite and >= 0");
  }
  if (mean == 0.0) return 0;
  if (mean < 30.0) return poisson_inversion(mean);
  return poisson_ptrs(mean);
}

std::uint64_t Rng::poisson_inversion(double mean) {
  // multiply uniforms until the product drops below exp(-mean)
  const double limit = std::exp(-mean);
  std::uint64_t k = 0;
  double prod = uniform();
  while (prod > limit) {
    ++k;
    prod *= uniform();
  }
  return k;
}

std::uint64_t Rng::poisson_ptrs(double mean) {
  // W. Hormann, "The transformed rejection method for generating Poisson
  // random variables" (PTRS), valid for mean >= 10.
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);

  for (;;) {
    double u = uniform() - 0.5;
    double v = uniform();
    double us = 0.5 - std::abs(u);
    double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) {
      return static_cast<std::uint64_t>(k);
    }
    if (k < 0.0 || (us < 0.013 && v > us)) {
      continue;
    }
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        k * loglam - mean - std::lgamma(k + 1.0)) {
      return static_cast<std::uint64_t>(k);
    }
  }
}

}  // namespace qilens

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <utility>

#include "qilens/errors.hpp"

namespace qilens {

template <typename F>
double integrate_adaptive(F&& f, double a, double b, double rtol, int max_depth) {
  if (a == b) return 0.0;
  using boost::math::quadrature::gauss_kronrod;
  double error = 0.0;
  double l1 = 0.0;
  double result = gauss_kronrod<double, 15>::integrate(std::forward<F>(f), a, b,
                                                       max_depth, rtol, &error, &l1);
  // boost reports the error estimate relative to the L1 norm of the integrand
  double achieved = (l1 > 0.0) ? error / l1 : error;
  if (!(achieved <= rtol) && !(error <= rtol * std::abs(result)) &&
      !(std::abs(result) == 0.0 && error == 0.0)) {
    throw NumericalError("adaptive quadrature did not reach requested tolerance",
                         achieved);
  }
  return result;
}

}  // namespace qilens

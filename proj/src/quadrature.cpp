// SPDX-License-Identifier: Apache-2.0
#include "qilens/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "qilens/errors.hpp"

namespace qilens {

GaussRule gauss_legendre(int order, double a, double b) {
  if (order < 1) throw ValidationError("gauss_legendre: order must be >= 1");
  if (!(a < b)) throw ValidationError("gauss_legendre: need a < b");

  const int n = order;
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);

  const double xm = 0.5 * (b + a);
  const double xl = 0.5 * (b - a);
  const int m = (n + 1) / 2;
  const double eps = 1e-15;

  for (int i = 0; i < m; ++i) {
    // Chebyshev estimate of the i-th root, then Newton on P_n.
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0;
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= eps) break;
    }
    rule.nodes[i] = xm - xl * z;
    rule.nodes[n - 1 - i] = xm + xl * z;
    rule.weights[i] = 2.0 * xl / ((1.0 - z * z) * pp * pp);
    rule.weights[n - 1 - i] = rule.weights[i];
  }
  return rule;
}

}  // namespace qilens

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace qilens {

// Gauss-Legendre nodes and weights on [a, b].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::size_t size() const { return nodes.size(); }
};

// Newton iteration on the Legendre recurrence; order is arbitrary.
// Nodes come out in ascending order.
GaussRule gauss_legendre(int order, double a, double b);

// Adaptive Gauss-Kronrod integration of f over [a, b] to relative
// tolerance rtol. Throws NumericalError when the refinement limit is
// reached without meeting rtol (the achieved tolerance is attached).
template <typename F>
double integrate_adaptive(F&& f, double a, double b, double rtol,
                          int max_depth = 18);

}  // namespace qilens

#include "qilens/detail/quadrature_impl.hpp"

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace qilens {

// Bad inputs or violated type invariants. CLI exit code 2.
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Quadrature or optimizer failure. Carries the tolerance that was achieved
// when the target could not be met. CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& what, double achieved_tol = -1.0)
      : std::runtime_error(what), achieved_tol_(achieved_tol) {}
  double achieved_tolerance() const noexcept { return achieved_tol_; }

private:
  double achieved_tol_;
};

// File and path problems. CLI exit code 4.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace qilens

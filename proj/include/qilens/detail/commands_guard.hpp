// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>

#include "qilens/errors.hpp"

namespace qilens {

template <typename F>
int guarded(F&& body, std::ostream& err) {
  try {
    return body();
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what();
    if (e.achieved_tolerance() >= 0.0) {
      err << " (achieved tolerance " << e.achieved_tolerance() << ")";
    }
    err << '\n';
    return 3;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace qilens

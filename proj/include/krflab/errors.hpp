#pragma once

#include <stdexcept>
#include <string>

namespace krflab {

/// A mathematically meaningful refusal: non-Kähler initial class, loss of
/// admissibility, infinite existence time where a finite one is required.
/// Usage problems (bad dimensions, malformed input) use std::invalid_argument.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace krflab

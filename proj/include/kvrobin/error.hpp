#pragma once

#include <stdexcept>
#include <string>

namespace kvrobin {

/// Bad input: malformed config, inconsistent geometry, out-of-range argument.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A linear solve failed (indefinite operator, residual above tolerance).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kvrobin

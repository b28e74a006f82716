#pragma once

#include <stdexcept>
#include <string>

namespace gaspanel {

/// Malformed input: schema, unit, key or file-level problems.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure: rank loss, unidentified coefficients, weak instruments.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid model or command configuration.
class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace gaspanel

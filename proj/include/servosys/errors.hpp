#pragma once

#include <stdexcept>
#include <string>

namespace servosys {

// Bad input: out-of-range parameters, malformed files, violated preconditions.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Filesystem failures (unreadable / unwritable paths).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace servosys

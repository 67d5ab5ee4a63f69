#pragma once

#include <stdexcept>
#include <string>

namespace robin_sep {

/// Invalid input: a violated precondition or a malformed configuration.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed (no bracket, Newton divergence, unstable step).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace robin_sep

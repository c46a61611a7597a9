#pragma once

#include <stdexcept>
#include <string>

namespace lstlab {

/// Precondition or argument violation by the caller (maps to CLI exit code 2).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Illegal action for the current decision point.
class MaskViolation : public UsageError {
 public:
  using UsageError::UsageError;
};

/// Malformed or degenerate input data (maps to CLI exit code 3).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A metric or statistic that is undefined for the given inputs.
class UndefinedMetric : public DataError {
 public:
  using DataError::DataError;
};

/// A search found no solution inside the requested bracket.
class OutOfRange : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lstlab

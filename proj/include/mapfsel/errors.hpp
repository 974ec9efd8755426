#pragma once

#include <stdexcept>
#include <string>

namespace mapfsel {

// Malformed or inconsistent input data (bad files, invalid instances).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input that fails to parse; message names the offending line/column.
class ParseError : public DataError {
 public:
  using DataError::DataError;
};

// Target cell is not reachable from the source cell.
class NoPathError : public DataError {
 public:
  using DataError::DataError;
};

// Bad caller-supplied configuration (flags, config files, split specs).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A check that should hold by construction did not.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace mapfsel

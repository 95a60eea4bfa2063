#pragma once

#include <stdexcept>
#include <string>

namespace permlrcs {

// Base for everything the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dims violate a structural constraint (s | m, m/s >= r, ...).
class InvalidDims : public Error {
 public:
  using Error::Error;
};

// Operand shapes disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Input is numerically degenerate: zero matrix, rank deficiency, failed QR.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

// Normal equations or least-squares system could not be solved.
class SingularSystemError : public Error {
 public:
  using Error::Error;
};

// Instance directory or config file is malformed or unreadable.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace permlrcs

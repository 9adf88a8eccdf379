#pragma once

#include <stdexcept>
#include <string>

namespace dimsr {

// Base for all library failures. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

// Dimensionally inconsistent expression or impossible nondimensionalization.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Numeric domain violation: log of a non-positive value, sqrt of a negative, ...
class DomainError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace dimsr

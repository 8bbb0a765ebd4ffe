#pragma once

#include <stdexcept>
#include <string>

namespace eopm {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation.
class DomainError : public Error {
public:
  using Error::Error;
};

/// A frequency does not sit on the quantization grid.
class NotOnGrid : public DomainError {
public:
  using DomainError::DomainError;
};

/// A mode index would be zero or negative.
class NonPositive : public DomainError {
public:
  using DomainError::DomainError;
};

/// An output mode of a large-carrier expansion falls at or below zero.
class UnphysicalMode : public Error {
public:
  using Error::Error;
};

/// A numerical kernel failed its internal residual check.
class ConvergenceError : public Error {
public:
  using Error::Error;
};

/// A truncated window leaks too much probability into its edge.
class TruncationError : public Error {
public:
  using Error::Error;
};

}  // namespace eopm

#pragma once

#include <stdexcept>
#include <string>

namespace goodwin {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (negative
/// concentration, non-positive rate, inadmissible nonlinearity).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Configuration document could not be read or is malformed.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Base for failures of a numerical procedure on otherwise valid input.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class BracketError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class StepSizeUnderflow : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class EigenSolverError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class TrajectoryTooShort : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Requested value lies outside what a parametric family can reach.
class RangeError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace goodwin

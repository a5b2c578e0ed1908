#pragma once

#include <stdexcept>
#include <string>

namespace pulsesynth {

// Error hierarchy. The CLI maps each family onto a process exit code:
//   InvalidArgument -> 2 (usage), DataError -> 3, NumericalError -> 4.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller supplied a parameter outside the operation's precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class BandSpecError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class LookupError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// The data itself cannot support the requested computation.
class DataError : public Error {
 public:
  using Error::Error;
};

class DegenerateRangeError : public DataError {
 public:
  using DataError::DataError;
};

class AlignmentError : public DataError {
 public:
  using DataError::DataError;
};

class InsufficientPeaksError : public DataError {
 public:
  using DataError::DataError;
};

class ShapeError : public DataError {
 public:
  using DataError::DataError;
};

class DomainError : public DataError {
 public:
  using DataError::DataError;
};

// Structured-input validation failure; `field` is a JSON-pointer-like path
// such as "b[2]".
class ValidationError : public DataError {
 public:
  ValidationError(std::string field, const std::string& what)
      : DataError(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public NumericalError {
 public:
  DivergenceError(double t, const std::string& what)
      : NumericalError(what + " (t=" + std::to_string(t) + ")"), t_(t) {}

  double time() const noexcept { return t_; }

 private:
  double t_;
};

}  // namespace pulsesynth

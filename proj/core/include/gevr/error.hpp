#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace gevr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Input data cannot be used (malformed rows, no surviving blocks, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed: singular matrices, exhausted brackets,
/// too many failed bootstrap refits.
class NumericError : public Error {
 public:
  using Error::Error;
};

class ConditioningError : public NumericError {
 public:
  ConditioningError(const std::string& what, std::array<double, 3> eigenvalues)
      : NumericError(what), eigenvalues_(eigenvalues) {}
  [[nodiscard]] const std::array<double, 3>& eigenvalues() const { return eigenvalues_; }

 private:
  std::array<double, 3> eigenvalues_;
};

class UnfittableDataError : public NumericError {
 public:
  using NumericError::NumericError;
};

class ReliabilityError : public NumericError {
 public:
  ReliabilityError(const std::string& what, double failure_rate)
      : NumericError(what), failure_rate_(failure_rate) {}
  [[nodiscard]] double failure_rate() const { return failure_rate_; }

 private:
  double failure_rate_;
};

class DegenerateStatisticError : public NumericError {
 public:
  using NumericError::NumericError;
};

class BracketExhaustedError : public NumericError {
 public:
  BracketExhaustedError(const std::string& what, double lo, double hi)
      : NumericError(what), bracket_{lo, hi} {}
  [[nodiscard]] std::pair<double, double> bracket() const { return bracket_; }

 private:
  std::pair<double, double> bracket_;
};

/// Raised when a hypothesis is requested from a test that cannot assess it
/// (e.g. the entropy-difference test at r = 1).
class UnsupportedError : public DomainError {
 public:
  using DomainError::DomainError;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column = 0)
      : DataError(what), line_(line), column_(column) {}
  [[nodiscard]] std::size_t line() const { return line_; }
  [[nodiscard]] std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace gevr

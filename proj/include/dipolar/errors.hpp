#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dipolar {

// Root of every exception the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller supplied something outside the documented domain (negative field,
// unknown unit, bad species label, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Mathematical domain violation, e.g. h(x) for x < 1.
class DomainError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class UnsupportedStatistics : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

// Quadrature, integrator or solver could not reach its tolerance.
class NumericalFailure : public Error {
 public:
  NumericalFailure(const std::string& what, double error_estimate = 0.0)
      : Error(what), error_estimate_(error_estimate) {}
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double error_estimate_;
};

class DegenerateFit : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

class InsufficientData : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

// Config / CSV syntax or range problem. line and column are 1-based, 0 when
// not applicable.
class ParseError : public InvalidInput {
 public:
  ParseError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
      : InvalidInput(format(what, line, column)), line_(line), column_(column) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& what, std::size_t line, std::size_t column) {
    if (line == 0) return what;
    std::string s = "line " + std::to_string(line);
    if (column != 0) s += ", column " + std::to_string(column);
    return s + ": " + what;
  }
  std::size_t line_;
  std::size_t column_;
};

}  // namespace dipolar

#pragma once

#include <stdexcept>
#include <string>

namespace rvine {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parameters outside a family's domain, or an otherwise invalid numeric input.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A density evaluated to zero or a non-finite value at working precision.
class EvalError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class StructureError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class IntegrationError : public Error {
 public:
  using Error::Error;
};

class SingularityError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class NonNumericError : public ParseError {
 public:
  NonNumericError(const std::string& what, std::size_t line, std::size_t column)
      : ParseError(what), line_(line), column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class ConstantColumnError : public ParseError {
 public:
  using ParseError::ParseError;
};

class DimensionError : public ParseError {
 public:
  using ParseError::ParseError;
};

}  // namespace rvine

#pragma once

#include <stdexcept>
#include <string>

namespace capplan {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Model ingestion.
class SchemaError : public Error {
 public:
  using Error::Error;
};
class DanglingReference : public Error {
 public:
  using Error::Error;
};
class DuplicateId : public Error {
 public:
  using Error::Error;
};

// Expressions.
class ExpressionError : public Error {
 public:
  using Error::Error;
};
class UnknownOperator : public ExpressionError {
 public:
  using ExpressionError::ExpressionError;
};
class ArityError : public ExpressionError {
 public:
  using ExpressionError::ExpressionError;
};
class TypeError : public ExpressionError {
 public:
  using ExpressionError::ExpressionError;
};
class MissingValue : public ExpressionError {
 public:
  using ExpressionError::ExpressionError;
};
class DivisionByZero : public ExpressionError {
 public:
  using ExpressionError::ExpressionError;
};
class UnsupportedExpression : public ExpressionError {
 public:
  using ExpressionError::ExpressionError;
};

// Solver driver.
class SolverError : public Error {
 public:
  using Error::Error;
};
class SolverLaunchError : public SolverError {
 public:
  using SolverError::SolverError;
};
class SolverProtocolError : public SolverError {
 public:
  using SolverError::SolverError;
};

// Planning.
class InvalidModel : public Error {
 public:
  using Error::Error;
};
class IncompleteModel : public Error {
 public:
  using Error::Error;
};
class CoresUnavailable : public Error {
 public:
  using Error::Error;
};
class DomainTooLarge : public Error {
 public:
  using Error::Error;
};

}  // namespace capplan

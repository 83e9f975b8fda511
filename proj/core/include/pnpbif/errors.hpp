#pragma once

#include <stdexcept>
#include <string>

namespace pnpbif {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A formula was evaluated outside its domain: a log argument <= 0, a
/// vanishing denominator, or a point violating the current bound. Solvers
/// treat this as "bad trial point" and back off.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Division by a quantity that is structurally zero for the given inputs
/// (e.g. a flux ratio at the zero-charge reversal potential). Callers skip
/// the point rather than widen a bracket.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// Argument outside an accepted range (e.g. an abscissa outside [0, 1]).
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Invariant of a value type violated at construction.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. `line()` is 1-based; 0 means "whole file".
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

class NoBracketError : public SolverError {
 public:
  using SolverError::SolverError;
};

class MaxIterError : public SolverError {
 public:
  using SolverError::SolverError;
};

class SingularJacobianError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Trust radius collapsed below the step tolerance without reaching the
/// residual tolerance and with a well-conditioned Jacobian.
class StallError : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace pnpbif

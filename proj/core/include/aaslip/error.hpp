#pragma once

#include <stdexcept>
#include <string>

namespace aaslip {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A stance state with no well-defined leg (r = 0) or outside the stance region.
class InvalidStateError : public Error {
 public:
  using Error::Error;
};

/// Center of pressure requested where F_leg * sin(theta) vanishes.
class UndefinedCopError : public Error {
 public:
  using Error::Error;
};

/// A task or configuration that cannot produce a feasible problem.
class InfeasibleTaskError : public Error {
 public:
  using Error::Error;
};

class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An NLP evaluator returned a non-finite value.
class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& what, int index)
      : Error(what), index_(index) {}

  /// Offending constraint row (or -1 for the objective).
  int index() const { return index_; }

 private:
  int index_;
};

}  // namespace aaslip

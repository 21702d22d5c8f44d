#pragma once

#include <stdexcept>
#include <string>

namespace skinpar {

/// Base class of all library errors that are not plain argument errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bricks do not fit the domain, or a brick has zero volume.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// A lipid channel would not contain a single cell center.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// Two objects that must live on the same grid do not.
class GridMismatch : public Error {
 public:
  using Error::Error;
};

class SingularMatrix : public Error {
 public:
  using Error::Error;
};

/// An interval is not covered by an integral number of time steps.
class StepCountError : public Error {
 public:
  using Error::Error;
};

/// A linear solve inside a time step did not reach its tolerance.
///
/// When raised from the Parareal engine, `iteration` and `subinterval`
/// locate the failing task; both are -1 for a plain serial run.
class StepFailure : public Error {
 public:
  StepFailure(const std::string& what, int iteration = -1, int subinterval = -1)
      : Error(what), iteration_(iteration), subinterval_(subinterval) {}

  int iteration() const noexcept { return iteration_; }
  int subinterval() const noexcept { return subinterval_; }

 private:
  int iteration_;
  int subinterval_;
};

/// Malformed or inconsistent experiment configuration. `line` is 1-based, 0 if
/// the problem is not attributable to a single line.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace skinpar

#pragma once

#include <stdexcept>
#include <string>

namespace wecs {

/// Base for every error raised by the workbench.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a model function.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Root-finding found no bracket inside the admissible interval.
class NoRootError : public Error {
 public:
  using Error::Error;
};

/// Incompatible matrix or signal dimensions.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A linear solve hit a (numerically) singular matrix.
class SingularError : public Error {
 public:
  using Error::Error;
};

/// A state or signal became NaN/Inf.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file; carries the offending line when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, int line, const std::string& what)
      : Error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) +
              ": " + what),
        line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace wecs

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace graphchain {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text. line() is 1-based, 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ReferenceError : public ParseError {
 public:
  using ParseError::ParseError;
};

class DuplicateError : public ParseError {
 public:
  using ParseError::ParseError;
  explicit DuplicateError(const std::string& what) : ParseError(0, what) {}
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class PlanningError : public Error {
 public:
  using Error::Error;
};

// Operation not allowed in the current session status.
class StateError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class ExecutionError : public Error {
 public:
  using Error::Error;
};

// Transient failure of an external backend; the caller may retry.
class RetryableError : public Error {
 public:
  using Error::Error;
};

}  // namespace graphchain

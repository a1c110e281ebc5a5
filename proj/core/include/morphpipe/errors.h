#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace morphpipe {

// Base class for recoverable data errors (bad input files, bad models).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input; line() is 1-based, 0 when not applicable.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + message
                       : message),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Well-formed input using a construct this library refuses to handle
// (multiword tokens, empty nodes).
class UnsupportedConstruct : public ParseError {
 public:
  using ParseError::ParseError;
};

// A caller broke a documented precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Two documents that cannot be scored against each other.
class IncomparableInput : public Error {
 public:
  using Error::Error;
};

class LoadError : public Error {
 public:
  LoadError(const std::string& file, const std::string& message)
      : Error(file + ": " + message), file_(file) {}

  const std::string& file() const { return file_; }

 private:
  std::string file_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Raised when a training loss stops being finite.
class TrainingDiverged : public Error {
 public:
  using Error::Error;
};

// The static arc-eager oracle has no action sequence for this tree.
class OracleUnavailable : public Error {
 public:
  using Error::Error;
};

}  // namespace morphpipe

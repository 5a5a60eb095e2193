#pragma once

#include <stdexcept>
#include <string>

namespace tnd {

// Every library failure derives from tnd::Error so front ends can map a
// category to an exit status without string matching.
enum class ErrorKind {
  validation,   // input violates a documented invariant
  parse,        // malformed file or missing field
  io,           // file could not be opened / written
  configuration // dimensions or hyperparameters disagree
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorKind::validation, what) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(ErrorKind::parse, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

class ConfigurationError : public Error {
 public:
  explicit ConfigurationError(const std::string& what)
      : Error(ErrorKind::configuration, what) {}
};

/// A stop was placed on two bus lines, or a line referenced an unknown stop.
class InvalidAssignmentError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Moving a stop onto its own line, or taking the last stop off a line.
class InadmissibleActionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::validation: return "validation";
    case ErrorKind::parse: return "parse";
    case ErrorKind::io: return "io";
    case ErrorKind::configuration: return "configuration";
  }
  return "unknown";
}

}  // namespace tnd

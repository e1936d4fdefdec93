#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ontobuild {

/// Base class for every error raised by the toolchain.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input bytes (XML, Turtle, RDF/XML, JSON, config).
class ParseError : public Error {
 public:
  ParseError(const std::string& message, int line = 0, int column = 0)
      : Error(line > 0 ? message + " (line " + std::to_string(line) + ", column " +
                             std::to_string(column) + ")"
                       : message),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

/// Well-formed input that breaks a structural or semantic constraint.
class ValidationError : public Error {
 public:
  using Error::Error;
};

enum class Severity { Warning, Violation, Error };

/// A non-fatal finding attached to a report; fatal problems throw instead.
struct Diagnostic {
  Severity severity = Severity::Warning;
  std::string code;
  std::string location;
  std::string message;

  bool operator==(const Diagnostic&) const = default;
};

const char* to_string(Severity severity) noexcept;

}  // namespace ontobuild

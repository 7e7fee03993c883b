#pragma once

#include <stdexcept>
#include <string>

namespace softskills {

/// Bad input values, violated preconditions, inconsistent configuration.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed file content. Carries the offending line when known.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : ValidationError(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Missing or unreadable/unwritable files.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace softskills

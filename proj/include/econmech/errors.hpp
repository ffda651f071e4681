#pragma once

#include <stdexcept>
#include <string>

namespace econmech {

/// A parameter is outside the domain of the law or formula it feeds.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A force law was evaluated at its singular point (e.g. 1/q at q <= 0).
class SingularityError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// The network cannot be turned into state equations.
class AssemblyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Integration produced a non-finite state.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(const std::string& what, double time)
      : std::runtime_error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Scenario text could not be parsed or failed validation.
class ParseError : public std::invalid_argument {
 public:
  ParseError(const std::string& message, int line, int column = 0)
      : std::invalid_argument(format(message, line, column)),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& message, int line, int column) {
    std::string out = "line " + std::to_string(line);
    if (column > 0) out += ", column " + std::to_string(column);
    return out + ": " + message;
  }

  int line_;
  int column_;
};

}  // namespace econmech

#pragma once

#include <stdexcept>
#include <string>

namespace stransport {

/// Failure categories. Each maps to exactly one CLI exit code.
enum class ErrorKind {
  Parse,       ///< malformed expression or configuration (exit 2)
  Assumption,  ///< input violates a modelling assumption (exit 3)
  Numeric      ///< evaluation or quadrature failure (exit 4)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(ErrorKind::Parse, what), position_(position) {}

  /// Zero-based character offset into the parsed text.
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Parse, what) {}
};

class AssumptionError : public Error {
 public:
  explicit AssumptionError(const std::string& what)
      : Error(ErrorKind::Assumption, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorKind::Numeric, what) {}
};

inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return 2;
    case ErrorKind::Assumption: return 3;
    case ErrorKind::Numeric: return 4;
  }
  return 4;
}

}  // namespace stransport

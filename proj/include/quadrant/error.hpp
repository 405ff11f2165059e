#pragma once

#include <stdexcept>
#include <string>

namespace quadrant {

// Exit-code classes used by the command-line front end.
enum class ErrorKind { Validation = 2, Numeric = 3, Io = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Model file could not be parsed. Carries a 1-based line/column when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line = 0, int column = 0)
      : Error(ErrorKind::Validation, format(what, line, column)), line_(line), column_(column) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& what, int line, int column) {
    if (line <= 0) return "parse error: " + what;
    return "parse error at line " + std::to_string(line) + ", column " + std::to_string(column) +
           ": " + what;
  }
  int line_;
  int column_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorKind::Numeric, what) {}
};

// Specific numeric failure modes.
struct NoSecondRoot : NumericError { using NumericError::NumericError; };
struct BranchLoss : NumericError { using NumericError::NumericError; };
struct NotConverged : NumericError { using NumericError::NumericError; };
struct FitUnstable : NumericError { using NumericError::NumericError; };
struct WindowExplosion : NumericError { using NumericError::NumericError; };
struct QuadratureUnstable : NumericError { using NumericError::NumericError; };
struct ResidualFloor : NumericError { using NumericError::NumericError; };

}  // namespace quadrant

#pragma once

#include <stdexcept>
#include <string>

namespace affthermo {

/// Classifies a failure for exit-code mapping in the command line tool.
enum class ErrorCategory {
  Precondition,  ///< caller violated a documented precondition
  Budget,        ///< enumeration or search budget exhausted
  Parse,         ///< malformed input document
  Io,
};

/// Base class for every error raised by the library. Messages always name
/// the module that raised them and the violated condition.
class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, std::string module, std::string kind,
        const std::string& detail)
      : std::runtime_error(module + ": " + kind + ": " + detail),
        category_(category),
        module_(std::move(module)),
        kind_(std::move(kind)) {}

  ErrorCategory category() const noexcept { return category_; }
  const std::string& module() const noexcept { return module_; }
  /// Short machine-readable error name, e.g. "RankError".
  const std::string& kind() const noexcept { return kind_; }

 private:
  ErrorCategory category_;
  std::string module_;
  std::string kind_;
};

class PreconditionError : public Error {
 public:
  PreconditionError(std::string module, std::string kind,
                    const std::string& detail)
      : Error(ErrorCategory::Precondition, std::move(module), std::move(kind),
              detail) {}
};

class BudgetExceeded : public Error {
 public:
  BudgetExceeded(std::string module, const std::string& detail)
      : Error(ErrorCategory::Budget, std::move(module), "BudgetExceeded",
              detail) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& detail, int line, int column)
      : Error(ErrorCategory::Parse, "cli", "ParseError",
              detail + (line > 0 ? " (line " + std::to_string(line) +
                                       ", column " + std::to_string(column) +
                                       ")"
                                 : std::string{})),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace affthermo

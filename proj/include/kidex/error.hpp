#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kidex {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input could not be read or does not satisfy its file schema.
class IngestError : public Error {
 public:
  using Error::Error;
};

/// Output destination could not be written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Rule file failed to parse or validate. Carries the source position.
class RuleError : public Error {
 public:
  RuleError(const std::string& source, std::size_t line, std::size_t column,
            const std::string& message)
      : Error(source + ":" + std::to_string(line) + ":" +
              std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// A rule exceeded the backtracking step budget for one start token.
class RuleComplexityError : public Error {
 public:
  explicit RuleComplexityError(const std::string& rule_id)
      : Error("rule " + rule_id + " exceeded the backtracking step limit"),
        rule_id_(rule_id) {}

  const std::string& rule_id() const noexcept { return rule_id_; }

 private:
  std::string rule_id_;
};

/// Cells of one table carry anchors of more than one table type.
class AmbiguousTableError : public Error {
 public:
  using Error::Error;
};

}  // namespace kidex

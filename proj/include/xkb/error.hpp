#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace xkb {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed DSL text. Carries a 1-based source position and the set of
/// tokens that would have been accepted there (empty for semantic errors
/// such as an unknown feature).
class ParseError : public Error {
 public:
  ParseError(std::string message, std::size_t line, std::size_t column,
             std::vector<std::string> expected = {});

  const std::string& detail() const { return detail_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  std::string detail_;
  std::size_t line_;
  std::size_t column_;
  std::vector<std::string> expected_;
};

/// Structurally invalid input: schema mismatch, bad CSV, duplicate ids,
/// a data rule that is not an instance rule.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// An enumeration bound was hit (grid size, remainder count, exact cover).
/// Never raised silently; the partial count is kept for reporting.
class LimitError : public Error {
 public:
  LimitError(std::string message, std::size_t partial = 0)
      : Error(std::move(message)), partial_(partial) {}
  std::size_t partial() const { return partial_; }

 private:
  std::size_t partial_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace xkb

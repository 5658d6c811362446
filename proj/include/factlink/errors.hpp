#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace factlink {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (files, records, payloads).
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(what) {}
  /// `line` is 1-based; 0 means "not tied to a line".
  DataError(const std::string& what, std::string field, std::size_t line = 0)
      : Error(compose(what, field, line)), line_(line), field_(std::move(field)) {}

  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }
  /// Message without the line/field prefix.
  std::string detail() const {
    std::string w = what();
    auto pos = w.find("': ");
    return pos == std::string::npos ? w : w.substr(pos + 3);
  }

 private:
  static std::string compose(const std::string& what, const std::string& field, std::size_t line) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    out += "field '" + field + "': " + what;
    return out;
  }

  std::size_t line_ = 0;
  std::string field_;
};

/// A request that breaks an operation contract (bad label combination, bad argument).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// The request conflicts with current state (closed pair, repeated submission).
class ConflictError : public Error {
 public:
  using Error::Error;
};

/// A second write of something that may only be written once.
class DuplicateError : public ConflictError {
 public:
  using ConflictError::ConflictError;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

/// Raised by rating unification; keeps the raw label for the caller.
class UnmappedLabelError : public Error {
 public:
  UnmappedLabelError(std::string raw, const std::string& checker)
      : Error("unmapped rating label '" + raw + "' for checker '" + checker + "'"),
        raw_(std::move(raw)) {}
  const std::string& raw_label() const { return raw_; }

 private:
  std::string raw_;
};

/// Markup error with the byte offset where parsing stopped.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error("parse error at byte " + std::to_string(offset) + ": " + what), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace factlink

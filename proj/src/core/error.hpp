#pragma once

#include <stdexcept>
#include <string>

namespace slowlight {

// Error categories map one-to-one onto C API status codes and CLI exit codes.
enum class ErrorKind {
  invalid_argument,
  parse,
  numeric,
  io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorKind::invalid_argument, what) {}
};

// Raised by the config parser. `line` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
 public:
  enum class Category { syntax, range, missing_key, unknown_key, usage };

  ParseError(Category category, int line, const std::string& what)
      : Error(ErrorKind::parse, what), category_(category), line_(line) {}

  Category category() const noexcept { return category_; }
  int line() const noexcept { return line_; }

 private:
  Category category_;
  int line_;
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what)
      : Error(ErrorKind::numeric, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

}  // namespace slowlight

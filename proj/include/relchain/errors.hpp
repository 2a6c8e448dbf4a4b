#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace relchain {

/// Base class for every data-level failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input; `line()` is 1-based, or 0 for binary inputs.
class ParseError : public Error {
 public:
  ParseError(std::string source, std::size_t line, const std::string& what)
      : Error(source + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
        source_(std::move(source)),
        line_(line) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class MissingPairError : public Error {
 public:
  MissingPairError(const std::string& a, const std::string& b)
      : Error("no relation embedding for pair (" + a + ", " + b + ")") {}
};

class DimensionError : public Error {
 public:
  DimensionError(std::size_t expected, std::size_t actual)
      : Error("dimension mismatch: expected " + std::to_string(expected) + ", got " +
              std::to_string(actual)) {}
};

}  // namespace relchain

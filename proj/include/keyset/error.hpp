#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace keyset {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

// Malformed key-set text. position() is a 0-based byte offset into the input.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " at position " + std::to_string(position)),
        detail_(what),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }
  // The message without the position suffix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string detail_;
  std::size_t position_;
};

class IngestError : public Error {
 public:
  using Error::Error;
};

// A rule was applied to inputs that violate its side conditions.
class RuleError : public Error {
 public:
  using Error::Error;
};

// An exact procedure would exceed a configured resource cap.
class CapExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace keyset

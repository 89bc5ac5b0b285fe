#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace idsnet {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad or missing input: unreadable files, malformed records, bad flags.
class InputError : public Error {
 public:
  using Error::Error;
};

// A KDD text line that cannot be parsed. Line numbers are 1-based; field
// numbers are 1-based and 0 when the whole line is at fault.
class ParseError : public InputError {
 public:
  ParseError(std::string source, std::size_t line, std::size_t field, const std::string& what);

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t field() const noexcept { return field_; }

 private:
  std::string source_;
  std::size_t line_;
  std::size_t field_;
};

// Truncated, corrupted or otherwise unreadable binary container.
class FormatError : public InputError {
 public:
  using InputError::InputError;
};

// Tensor shapes that an operation cannot combine.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Non-finite values during training or gradient checking.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Artifacts that do not belong together: version skew, feature-length mismatch.
class CompatibilityError : public Error {
 public:
  using Error::Error;
};

}  // namespace idsnet

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace trimodal {

// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor shapes or dimensions disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Input too short for a convolution cascade; carries the minimal admissible length.
class InputTooShortError : public DimensionError {
 public:
  InputTooShortError(std::size_t given, std::size_t minimum)
      : DimensionError("input length " + std::to_string(given) +
                       " is below the minimal admissible length " +
                       std::to_string(minimum)),
        given_(given),
        minimum_(minimum) {}

  std::size_t given() const noexcept { return given_; }
  std::size_t minimum() const noexcept { return minimum_; }

 private:
  std::size_t given_;
  std::size_t minimum_;
};

// Invalid argument or configuration value.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Malformed file content; carries the offending 1-based line when known.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& msg) : Error(msg), line_(0) {}
  ParseError(const std::string& msg, std::size_t line)
      : Error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Semantically invalid data (labels out of range, duplicate ids, empty sets).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// File system failure: missing file, truncated file, unwritable directory.
class IoError : public Error {
 public:
  using Error::Error;
};

// File exists but is in a format this library does not handle.
class UnsupportedFormatError : public IoError {
 public:
  using IoError::IoError;
};

// Numeric failure during training; carries the clip ids of the offending batch.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& msg, std::vector<std::string> clip_ids = {})
      : Error(msg), clip_ids_(std::move(clip_ids)) {}

  const std::vector<std::string>& clip_ids() const noexcept { return clip_ids_; }

 private:
  std::vector<std::string> clip_ids_;
};

}  // namespace trimodal

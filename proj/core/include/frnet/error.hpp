#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace frnet {

// Base of every exception the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor extents disagree with what an operation expects. `axis` names the
// offending dimension ("channels", "height", ...).
class DimensionError : public Error {
 public:
  DimensionError(std::string op, std::string axis, std::int64_t expected,
                 std::int64_t actual)
      : Error(op + ": dimension mismatch on axis '" + axis + "' (expected " +
              std::to_string(expected) + ", got " + std::to_string(actual) +
              ")"),
        axis_(std::move(axis)),
        expected_(expected),
        actual_(actual) {}

  DimensionError(const std::string& message, std::string axis)
      : Error(message), axis_(std::move(axis)) {}

  const std::string& axis() const noexcept { return axis_; }
  std::int64_t expected() const noexcept { return expected_; }
  std::int64_t actual() const noexcept { return actual_; }

 private:
  std::string axis_;
  std::int64_t expected_ = -1;
  std::int64_t actual_ = -1;
};

// Invalid static configuration (layer specs, model/train configs).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Caller violated an operation's precondition (non-scalar backward,
// non-binary mask, empty input, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Non-finite values encountered during training or optimization.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Checkpoint file is unreadable or does not match the requested model.
class LoadError : public Error {
 public:
  using Error::Error;
};

// Malformed text input (split manifests, pairs files, config files).
class ParseError : public Error {
 public:
  ParseError(const std::string& source, int line, const std::string& message)
      : Error(source + ":" + std::to_string(line) + ": " + message),
        line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

// Dataset files missing, unreadable or inconsistent.
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace frnet

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace foveal {

/// Base for every recoverable error raised while reading or validating input.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text record. `line` is 1-based.
class ParseError : public InputError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Coordinate outside the configured sensor resolution.
class RangeError : public InputError {
 public:
  using InputError::InputError;
};

/// Timestamp went backwards.
class OrderingError : public InputError {
 public:
  using InputError::InputError;
};

/// Binary layout violation. `offset` is the byte offset of the bad record.
class FormatError : public InputError {
 public:
  FormatError(std::uint64_t offset, const std::string& what)
      : InputError("offset " + std::to_string(offset) + ": " + what), offset_(offset) {}
  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

/// Invalid or incomplete run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke a protocol precondition (e.g. the handshake phase order).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace foveal

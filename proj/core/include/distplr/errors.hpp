#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace distplr {

/// A caller broke a documented precondition (wrong dimension, empty input, ...).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A query point lies outside the domain of a structure.
class DomainError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Invalid user-supplied data: environment files, problems, goals in collision.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed PLR1 byte stream. `offset()` is the byte position where decoding failed.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace distplr

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace smoothscale {

// Base class of every error thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A precondition on caller-supplied parameters was violated.
struct InvalidParameter : Error {
  using Error::Error;
};

// A statistic is undefined for the given input (e.g. adjacency discrepancy
// of a 1x1 image, which has no edges).
struct UndefinedStatistic : Error {
  using Error::Error;
};

// Parsing an external file failed; byte_offset locates the offending byte.
struct FormatError : Error {
  std::size_t byte_offset;
  FormatError(const std::string& msg, std::size_t offset)
      : Error(msg + " (at byte " + std::to_string(offset) + ")"),
        byte_offset(offset) {}
};

// Opening or writing a file failed.
struct IoError : Error {
  using Error::Error;
};

// The operation would exceed an explicit resource cap (memory or size).
struct ResourceLimit : Error {
  using Error::Error;
};

// An identity that must hold by construction failed; indicates a bug.
struct InvariantViolation : Error {
  using Error::Error;
};

}  // namespace smoothscale

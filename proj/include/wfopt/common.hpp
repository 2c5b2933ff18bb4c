#pragma once

#include <stdexcept>
#include <string>

namespace wfopt {

/// Base class for all engine errors.
struct Error : std::runtime_error {
  explicit Error(const std::string &msg) : std::runtime_error(msg) {}
};

/// A caller violated an operation's precondition.
struct InvalidArgument : Error {
  explicit InvalidArgument(const std::string &msg) : Error(msg) {}
};

/// A configured bound (permutation count, workload size) was exceeded.
struct CapacityError : Error {
  explicit CapacityError(const std::string &msg) : Error(msg) {}
};

/// A stream did not satisfy its declared physical-order property.
struct ContractViolation : Error {
  explicit ContractViolation(const std::string &msg) : Error(msg) {}
};

/// Temp-file or data-file I/O failure.
struct IoError : Error {
  explicit IoError(const std::string &msg) : Error(msg) {}
};

} // namespace wfopt

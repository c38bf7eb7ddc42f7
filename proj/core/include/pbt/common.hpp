#pragma once

#include <stdexcept>
#include <string>

namespace pbt {

/// Thrown when a caller breaks an operation's precondition (shape mismatch,
/// invalid configuration, out-of-order input, ...).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when serialized input (text formats, checkpoints) cannot be parsed
/// or does not match the expected layout.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractViolation(message);
}

}  // namespace pbt

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rpnlgp {

/// A caller violated an operation's preconditions.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The individual arena ran out of slots.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t token_position, const std::string& message)
      : std::runtime_error("token " + std::to_string(token_position) + ": " + message),
        position_(token_position) {}

  /// 1-based index of the offending token.
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

}  // namespace rpnlgp

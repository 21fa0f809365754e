#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace htcirc {

/// Shapes, indices or structures that violate a documented precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A requested dense tensor would exceed the configured entry budget.
class GuardError : public std::runtime_error {
 public:
  GuardError(std::uint64_t requested, std::uint64_t limit);

  std::uint64_t requested() const { return requested_; }
  std::uint64_t limit() const { return limit_; }

 private:
  std::uint64_t requested_;
  std::uint64_t limit_;
};

/// An internal consistency check failed.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace htcirc

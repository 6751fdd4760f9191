#pragma once

#include <stdexcept>
#include <string>

namespace subsum {

// A caller-supplied value violates an operation's precondition.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A configured size cap (group order, enumeration budget) was exceeded.
class CapExceeded : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Group/sequence/element literal could not be parsed.
class ParseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A step that the underlying theorem guarantees did not go through. Carries
// a description of the offending instance so the failure can be replayed.
class InternalError : public std::logic_error {
 public:
  InternalError(const std::string& what, std::string instance_dump)
      : std::logic_error(what), dump_(std::move(instance_dump)) {}

  const std::string& instance_dump() const noexcept { return dump_; }

 private:
  std::string dump_;
};

}  // namespace subsum

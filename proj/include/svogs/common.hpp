#pragma once

#include <stdexcept>
#include <string>

namespace svogs {

// Thrown on contract violations: bad dimensions, invalid parameters,
// malformed inputs. Messages name the offending quantity.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Thrown when a requested operation cannot run on the given object
// (e.g. a duality gap on a problem that does not declare a concave dual).
class UnsupportedOperation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidArgument(msg);
}

inline void require_op(bool cond, const std::string& msg) {
  if (!cond) throw UnsupportedOperation(msg);
}

}  // namespace detail
}  // namespace svogs

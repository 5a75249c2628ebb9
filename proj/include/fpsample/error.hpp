#pragma once

#include <stdexcept>
#include <string>

namespace fpsample {

/// An argument violates the precondition of the operation it was passed to.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An exhaustive enumeration would visit more outcomes than the configured limit.
class SizeLimitError : public std::length_error {
 public:
  using std::length_error::length_error;
};

namespace detail {

inline void require(bool ok, const char* what) {
  if (!ok) throw PreconditionError(what);
}

inline void require(bool ok, const std::string& what) {
  if (!ok) throw PreconditionError(what);
}

}  // namespace detail
}  // namespace fpsample

#pragma once

#include <stdexcept>
#include <string>

namespace quon {

enum class ErrorCode {
  InvalidArgument = 1,
  DimensionMismatch = 2,
  Singular = 3,
  Domain = 4,
  Convergence = 5,
  Conditioning = 6,
  Io = 7,
  Config = 8,
};

// All core failures are reported through this type; the C layer maps the
// code onto quon_status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace quon

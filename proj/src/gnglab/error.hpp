#pragma once

#include <stdexcept>
#include <string>

namespace gnglab {

enum class ErrorCode {
  Domain,
  Config,
  UnboundedVelocity,
  IntegrationFailure,
  Escaped,
  Coverage,
  Inapplicable,
  Bracket,
  NonRotating,
  Precondition,
  Io,
};

const char* error_code_name(ErrorCode code) noexcept;

/// Base exception for every failure raised by the library. The code is what
/// the C API reports; the message carries the operation and offending values.
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

}  // namespace gnglab

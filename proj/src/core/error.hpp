#pragma once
// Error type shared across the library.  Every failure carries a coarse code
// (so the C surface can translate it) plus a human-readable message.

#include <stdexcept>
#include <string>

namespace iso {

enum class ErrorCode {
  io,          // file missing / unreadable / unwritable
  parse,       // malformed text or JSON input
  invalid,     // bad argument or violated precondition
  dimension,   // mismatched vector / matrix dimensions
  degenerate,  // geometric degeneracy (coincident points, zero-length vectors)
  unsupported, // recognised but unsupported input (e.g. future file version)
  internal,    // bug: an invariant the library itself maintains was broken
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

} // namespace iso

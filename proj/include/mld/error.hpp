#pragma once

#include <stdexcept>
#include <string>

namespace mld {

enum class ErrorCode {
  InvalidArgument,
  InvalidCamera,
  Dimension,
  NoSupport,
  Precondition,
  Unsupported,
  Generation,
  Degenerate,
  Io,
  Format,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  // I/O and file-format failures versus everything else.
  bool is_io() const noexcept {
    return code_ == ErrorCode::Io || code_ == ErrorCode::Format;
  }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace mld

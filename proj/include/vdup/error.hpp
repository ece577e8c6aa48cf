#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vdup {

enum class ErrorKind {
  Validation,
  Parse,
  NotFound,
  DuplicateId,
  Ingestion,
  EmptyVideo,
  InsufficientData,
  Extraction,
  State,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` tells callers (mostly the
/// CLI) how to react.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace vdup

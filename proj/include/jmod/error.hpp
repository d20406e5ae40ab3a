#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace jmod {

enum class ErrorKind {
  invalid_argument,
  domain,
  numeric_instability,
  precision_exhausted,
  unsupported_level,
  parse,
  validation,
  size_limit,
  io,
};

inline constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::domain: return "domain-error";
    case ErrorKind::numeric_instability: return "numeric-instability";
    case ErrorKind::precision_exhausted: return "precision-exhausted";
    case ErrorKind::unsupported_level: return "unsupported-level";
    case ErrorKind::parse: return "parse-error";
    case ErrorKind::validation: return "validation-error";
    case ErrorKind::size_limit: return "size-limit";
    case ErrorKind::io: return "io-error";
  }
  return "error";
}

/// Every failure raised by the library. The kind is stable and is what the
/// CLI reports; the message is for humans.
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

}  // namespace jmod

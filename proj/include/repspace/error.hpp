#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace repspace {

enum class ErrorKind {
  invalid_argument,
  dimension_mismatch,
  zero_norm,
  non_finite,
  norm_violation,
  bad_magic,
  bad_version,
  truncated,
  tape_reused,
  validation,
  divergence,
  io,
};

std::string_view to_string(ErrorKind kind);

// Every failure in the library surfaces as this exception; kind() lets
// callers and tests tell the failure classes apart.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace repspace

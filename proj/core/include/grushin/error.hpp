#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace grushin {

/// Stable machine-readable error categories. The string form is part of the
/// CLI's JSON error contract, so existing names must not change.
enum class ErrorCode {
  parameter_domain,
  schema,
  discretization,
  tolerance,
  degeneracy,
  iteration,
  truncation,
  range,
  regime,
  consistency,
  resolution,
  incomplete_table,
  quadrature,
  io,
  config,
};

std::string_view to_string(ErrorCode code) noexcept;

/// True for errors caused by invalid input rather than numerical failure.
bool is_validation_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace grushin

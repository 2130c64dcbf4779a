#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace difnet {

enum class ErrorCode {
  invalid_params,
  not_connected,
  numerical_failure,
  no_root,
  invalid_count,
  bad_list,
  stability_violation,
  divergence,
  not_converged,
  dimension_overflow,
  no_convergence,
  eta_too_small,
  domain_error,
  config_error,
  parse_error,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library. `code()` identifies the condition so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  /// Message without the error-name prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

/// Configuration problem tied to a dotted key path such as `adaptation.step`.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(ErrorCode::config_error, field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace difnet

#pragma once

#include <map>
#include <stdexcept>
#include <string>

namespace loewner {

/// Failure categories. The CLI maps the first group to exit code 2
/// (bad input) and everything else to exit code 3 (numerical failure).
enum class ErrorKind {
  validation,
  domain,
  degenerate,
  io,
  // numerical failures
  integration,
  barrier,
  convergence,
  extrapolation,
  boundary_resolution,
  singular_value,
  not_herglotz,
  not_quasiconformal,
  degenerate_jacobian,
  derivative_degenerate,
  reconstruction_unstable,
  cannot_invert,
};

const char* to_string(ErrorKind kind) noexcept;

/// True for kinds that signal invalid input rather than a numerical failure.
bool is_validation_kind(ErrorKind kind) noexcept;

/// Exception carrying a kind plus named numeric diagnostics
/// (last good time, last iterates, worst angle, ...).
class Error : public std::runtime_error {
 public:
  using Diagnostics = std::map<std::string, double>;

  Error(ErrorKind kind, const std::string& message, Diagnostics diagnostics = {})
      : std::runtime_error(message), kind_(kind), diagnostics_(std::move(diagnostics)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const Diagnostics& diagnostics() const noexcept { return diagnostics_; }

 private:
  ErrorKind kind_;
  Diagnostics diagnostics_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message,
                              Error::Diagnostics diagnostics = {}) {
  throw Error(kind, message, std::move(diagnostics));
}

}  // namespace loewner

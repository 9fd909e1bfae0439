#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cpt {

enum class ErrorKind {
  InvalidArgument,
  SingularSystem,
  InvariantViolation,
  NonConvergentBaseline,
  NoResonance,
  Unbracketed,
  NotBracketed,
  InvalidSpin,
  OutOfRange,
  ParseError,
  MonotonicityError,
  TooFewSamples,
  NonConvergence,
  ConfigError,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        detail_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace cpt

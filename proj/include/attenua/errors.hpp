#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace attenua {

enum class ErrorKind {
  Precondition,
  ObstacleTouchesBox,
  EmptyFluid,
  NonzeroOnBoundary,
  NumericBlowup,
  BadWeightConstant,
  DegenerateWindow,
  NonPositiveValues,
  ConfigError,
  IoError,
};

constexpr std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::Precondition: return "Precondition";
    case ErrorKind::ObstacleTouchesBox: return "ObstacleTouchesBox";
    case ErrorKind::EmptyFluid: return "EmptyFluid";
    case ErrorKind::NonzeroOnBoundary: return "NonzeroOnBoundary";
    case ErrorKind::NumericBlowup: return "NumericBlowup";
    case ErrorKind::BadWeightConstant: return "BadWeightConstant";
    case ErrorKind::DegenerateWindow: return "DegenerateWindow";
    case ErrorKind::NonPositiveValues: return "NonPositiveValues";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

// Every failure raised by the library carries a kind so callers (and the CLI
// manifest) can report it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace attenua

#ifndef KGSPEC_ERROR_HPP
#define KGSPEC_ERROR_HPP

#include <stdexcept>
#include <string>

namespace kgspec {

/// Failure categories reported by the library. The CLI maps
/// InvalidArgument to exit status 2 and everything else to 3.
enum class ErrorKind {
  InvalidArgument,
  RotationalUnavailable,
  NoOrbit,
  SeparatrixDivergence,
  IntegrationFailure,
  ZeroCharacteristicValue,
  NonSimple,
  NotACharacteristicValue,
  TrackingAmbiguity,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::RotationalUnavailable: return "RotationalUnavailable";
    case ErrorKind::NoOrbit: return "NoOrbit";
    case ErrorKind::SeparatrixDivergence: return "SeparatrixDivergence";
    case ErrorKind::IntegrationFailure: return "IntegrationFailure";
    case ErrorKind::ZeroCharacteristicValue: return "ZeroCharacteristicValue";
    case ErrorKind::NonSimple: return "NonSimple";
    case ErrorKind::NotACharacteristicValue: return "NotACharacteristicValue";
    case ErrorKind::TrackingAmbiguity: return "TrackingAmbiguity";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace kgspec

#endif  // KGSPEC_ERROR_HPP

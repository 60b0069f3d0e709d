#pragma once

#include <stdexcept>
#include <string>

namespace preshape {

enum class ErrorKind {
  InputError,
  NotClosed,
  UmbilicPresent,
  DegenerateCoframe,
  NoRealization,
  NeverPositive,
  RectangularityViolation,
  DomainViolation,
  NotThreeRealRoots,
  PositivityLost,
  PeriodNonzero,
  MaskTooSmall,
  IndefiniteMetric,
  GridMismatch,
  UnknownKind,
  NonFinite,
  MixedVanishing,
  PreconditionViolation,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InputError: return "InputError";
    case ErrorKind::NotClosed: return "NotClosed";
    case ErrorKind::UmbilicPresent: return "UmbilicPresent";
    case ErrorKind::DegenerateCoframe: return "DegenerateCoframe";
    case ErrorKind::NoRealization: return "NoRealization";
    case ErrorKind::NeverPositive: return "NeverPositive";
    case ErrorKind::RectangularityViolation: return "RectangularityViolation";
    case ErrorKind::DomainViolation: return "DomainViolation";
    case ErrorKind::NotThreeRealRoots: return "NotThreeRealRoots";
    case ErrorKind::PositivityLost: return "PositivityLost";
    case ErrorKind::PeriodNonzero: return "PeriodNonzero";
    case ErrorKind::MaskTooSmall: return "MaskTooSmall";
    case ErrorKind::IndefiniteMetric: return "IndefiniteMetric";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::UnknownKind: return "UnknownKind";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::MixedVanishing: return "MixedVanishing";
    case ErrorKind::PreconditionViolation: return "PreconditionViolation";
  }
  return "?";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind k, const std::string& what) { throw Error(k, what); }

}  // namespace preshape

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ergokit {

enum class ErrorKind {
  WindowExhausted,
  NonInvertible,
  MixedSystems,
  IncompatibleOracle,
  UnsupportedOracle,
  UnsupportedSystem,
  InvalidArgument,
  NoProbeAccepted,
  ScaleUnderflow,
  EmptySchedule,
  ZeroMassAtom,
  AtomBudgetExceeded,
  HitStarvation,
  SearchExhausted,
  LengthMismatch,
  EpsOutOfRange,
  EmptyCloud,
  TooFewScales,
  TooFewPoints,
  MassStarvation,
  ConfigInvalid,
  TaskFailed,
  IoError,
};

constexpr std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::WindowExhausted: return "WindowExhausted";
    case ErrorKind::NonInvertible: return "NonInvertible";
    case ErrorKind::MixedSystems: return "MixedSystems";
    case ErrorKind::IncompatibleOracle: return "IncompatibleOracle";
    case ErrorKind::UnsupportedOracle: return "UnsupportedOracle";
    case ErrorKind::UnsupportedSystem: return "UnsupportedSystem";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NoProbeAccepted: return "NoProbeAccepted";
    case ErrorKind::ScaleUnderflow: return "ScaleUnderflow";
    case ErrorKind::EmptySchedule: return "EmptySchedule";
    case ErrorKind::ZeroMassAtom: return "ZeroMassAtom";
    case ErrorKind::AtomBudgetExceeded: return "AtomBudgetExceeded";
    case ErrorKind::HitStarvation: return "HitStarvation";
    case ErrorKind::SearchExhausted: return "SearchExhausted";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::EpsOutOfRange: return "EpsOutOfRange";
    case ErrorKind::EmptyCloud: return "EmptyCloud";
    case ErrorKind::TooFewScales: return "TooFewScales";
    case ErrorKind::TooFewPoints: return "TooFewPoints";
    case ErrorKind::MassStarvation: return "MassStarvation";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::TaskFailed: return "TaskFailed";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the toolkit carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, std::string_view what) {
  if (!cond) [[unlikely]] fail(kind, std::string(what));
}

}  // namespace ergokit

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace monoforge {

enum class ErrorCode {
  InvalidInput,
  DependentRows,
  ZeroPolynomial,
  DependentAlphaRows,
  BadBetaRow,
  ZeroXi,
  DimensionMismatch,
  BadCenter,
  BadExponents,
  OnDivisorZero,
  NotSquare,
  NotDominant,
  NotAMorphism,
  CutoffReached,
  NoDependentDivisors,
  PrenotMonomialTimesUnit,
  CycloLeak,
  BadShape,
  InvalidPoint,
  UnknownSession,
  PoleDetected,
  InternalAssertion,
};

inline std::string_view error_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::DependentRows: return "DependentRows";
    case ErrorCode::ZeroPolynomial: return "ZeroPolynomial";
    case ErrorCode::DependentAlphaRows: return "DependentAlphaRows";
    case ErrorCode::BadBetaRow: return "BadBetaRow";
    case ErrorCode::ZeroXi: return "ZeroXi";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::BadCenter: return "BadCenter";
    case ErrorCode::BadExponents: return "BadExponents";
    case ErrorCode::OnDivisorZero: return "OnDivisorZero";
    case ErrorCode::NotSquare: return "NotSquare";
    case ErrorCode::NotDominant: return "NotDominant";
    case ErrorCode::NotAMorphism: return "NotAMorphism";
    case ErrorCode::CutoffReached: return "CutoffReached";
    case ErrorCode::NoDependentDivisors: return "NoDependentDivisors";
    case ErrorCode::PrenotMonomialTimesUnit: return "PrenotMonomialTimesUnit";
    case ErrorCode::CycloLeak: return "CycloLeak";
    case ErrorCode::BadShape: return "BadShape";
    case ErrorCode::InvalidPoint: return "InvalidPoint";
    case ErrorCode::UnknownSession: return "UnknownSession";
    case ErrorCode::PoleDetected: return "PoleDetected";
    case ErrorCode::InternalAssertion: return "InternalAssertion";
  }
  return "Unknown";
}

// Process exit status for the CLI.
inline int exit_status(ErrorCode c) {
  switch (c) {
    case ErrorCode::CutoffReached: return 3;
    case ErrorCode::InternalAssertion:
    case ErrorCode::CycloLeak: return 4;
    default: return 2;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const noexcept { return error_name(code_); }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void ensure(bool cond, const std::string& what) {
  if (!cond) throw Error(ErrorCode::InternalAssertion, what);
}

}  // namespace monoforge

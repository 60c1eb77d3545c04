#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bnp {

enum class Errc {
  DimensionMismatch,
  NoGop,
  NoLrp,
  NoExtendedGop,
  Degenerate,
  InconsistentMarket,
  DomainError,
  Overflow,
  TooShort,
  FitFailed,
  ParseError,
  NonPositiveValue,
  NonMonotoneTime,
  StepTooLarge,
  SeriesContractMismatch,
  NumericalFailure,
};

constexpr std::string_view to_string(Errc e) {
  switch (e) {
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::NoGop: return "NoGop";
    case Errc::NoLrp: return "NoLrp";
    case Errc::NoExtendedGop: return "NoExtendedGop";
    case Errc::Degenerate: return "Degenerate";
    case Errc::InconsistentMarket: return "InconsistentMarket";
    case Errc::DomainError: return "DomainError";
    case Errc::Overflow: return "Overflow";
    case Errc::TooShort: return "TooShort";
    case Errc::FitFailed: return "FitFailed";
    case Errc::ParseError: return "ParseError";
    case Errc::NonPositiveValue: return "NonPositiveValue";
    case Errc::NonMonotoneTime: return "NonMonotoneTime";
    case Errc::StepTooLarge: return "StepTooLarge";
    case Errc::SeriesContractMismatch: return "SeriesContractMismatch";
    case Errc::NumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

// Every failure in the library surfaces as this exception; code() tells
// callers which contract was violated.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

  // Input errors map to exit code 2, numerical failures to 3.
  bool is_input_error() const noexcept {
    switch (code_) {
      case Errc::NumericalFailure:
      case Errc::Overflow:
      case Errc::StepTooLarge:
        return false;
      default:
        return true;
    }
  }

 private:
  Errc code_;
};

namespace detail {
inline void require(bool cond, Errc code, const char* msg) {
  if (!cond) throw Error(code, msg);
}
}  // namespace detail

}  // namespace bnp

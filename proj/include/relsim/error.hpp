#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace relsim {

// Every failure mode the library reports. The CLI maps these onto process
// exit codes; tests match on them directly.
enum class ErrorCode {
  NonFinite,
  DegenerateVelocity,
  ParseError,
  UnknownIdentifier,
  DomainError,
  ChargeZero,
  OutsideConstraintDomain,
  MasslessRegime,
  SpeedSingularity,
  TachyonBarrier,
  StepSizeUnderflow,
  NonUnitDirection,
  NonPositiveEnergy,
  IncompatibleFields,
  TachyonMomentumTooSmall,
  InsufficientSampling,
  ConfigError,
  InvalidRegime,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DegenerateVelocity: return "DegenerateVelocity";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownIdentifier: return "UnknownIdentifier";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::ChargeZero: return "ChargeZero";
    case ErrorCode::OutsideConstraintDomain: return "OutsideConstraintDomain";
    case ErrorCode::MasslessRegime: return "MasslessRegime";
    case ErrorCode::SpeedSingularity: return "SpeedSingularity";
    case ErrorCode::TachyonBarrier: return "TachyonBarrier";
    case ErrorCode::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorCode::NonUnitDirection: return "NonUnitDirection";
    case ErrorCode::NonPositiveEnergy: return "NonPositiveEnergy";
    case ErrorCode::IncompatibleFields: return "IncompatibleFields";
    case ErrorCode::TachyonMomentumTooSmall: return "TachyonMomentumTooSmall";
    case ErrorCode::InsufficientSampling: return "InsufficientSampling";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::InvalidRegime: return "InvalidRegime";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Parse failure with a 1-based byte offset into the source text and a short
// description of what would have been accepted there.
class ParseError : public Error {
 public:
  ParseError(std::size_t offset, std::string expected, const std::string& message)
      : Error(ErrorCode::ParseError,
              message + " at offset " + std::to_string(offset) +
                  " (expected " + expected + ")"),
        offset_(offset),
        expected_(std::move(expected)) {}

  std::size_t offset() const noexcept { return offset_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::string expected_;
};

}  // namespace relsim

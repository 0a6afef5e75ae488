#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mmcast {

enum class ErrorCode {
  InvalidInput,
  UnknownNode,
  DuplicateNode,
  DuplicateEdgeId,
  SelfLoop,
  CycleDetected,
  ClientNotSink,
  ClientWithoutInput,
  NegativeCapacity,
  NonpositiveCost,
  EmptyReachableSet,
  UnknownEdgeRate,
  InvalidModulus,
  DivisionByZero,
  ModulusMismatch,
  DimensionMismatch,
  Inconsistent,
  RankDeficient,
  UnknownSubset,
  UnitMismatch,
  InvalidSourceModel,
  GroundTooLarge,
  MaxIterationsExceeded,
  ReconstructabilityViolated,
  Infeasible,
  BudgetExceeded,
  InvalidParameters,
  NoProgress,
  NotLinearModel,
  InfeasibleRates,
  ScaleOverflow,
  FieldTooSmall,
  VerificationFailedAllAttempts,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::DuplicateNode: return "DuplicateNode";
    case ErrorCode::DuplicateEdgeId: return "DuplicateEdgeId";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::ClientNotSink: return "ClientNotSink";
    case ErrorCode::ClientWithoutInput: return "ClientWithoutInput";
    case ErrorCode::NegativeCapacity: return "NegativeCapacity";
    case ErrorCode::NonpositiveCost: return "NonpositiveCost";
    case ErrorCode::EmptyReachableSet: return "EmptyReachableSet";
    case ErrorCode::UnknownEdgeRate: return "UnknownEdgeRate";
    case ErrorCode::InvalidModulus: return "InvalidModulus";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::ModulusMismatch: return "ModulusMismatch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::Inconsistent: return "Inconsistent";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::UnknownSubset: return "UnknownSubset";
    case ErrorCode::UnitMismatch: return "UnitMismatch";
    case ErrorCode::InvalidSourceModel: return "InvalidSourceModel";
    case ErrorCode::GroundTooLarge: return "GroundTooLarge";
    case ErrorCode::MaxIterationsExceeded: return "MaxIterationsExceeded";
    case ErrorCode::ReconstructabilityViolated: return "ReconstructabilityViolated";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::InvalidParameters: return "InvalidParameters";
    case ErrorCode::NoProgress: return "NoProgress";
    case ErrorCode::NotLinearModel: return "NotLinearModel";
    case ErrorCode::InfeasibleRates: return "InfeasibleRates";
    case ErrorCode::ScaleOverflow: return "ScaleOverflow";
    case ErrorCode::FieldTooSmall: return "FieldTooSmall";
    case ErrorCode::VerificationFailedAllAttempts: return "VerificationFailedAllAttempts";
  }
  return "Unknown";
}

// Every failure in the library is reported through this type. `context`
// carries a short machine-readable detail (a witness cycle, an edge id, ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, std::string context = {})
      : std::runtime_error(std::move(message)), code_(code), context_(std::move(context)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& context() const noexcept { return context_; }

 private:
  ErrorCode code_;
  std::string context_;
};

// Exit-status category used by the CLI: input problems versus outcomes that
// are well-formed but negative (infeasible, verification failed).
constexpr bool is_outcome_failure(ErrorCode code) {
  switch (code) {
    case ErrorCode::Infeasible:
    case ErrorCode::InfeasibleRates:
    case ErrorCode::ReconstructabilityViolated:
    case ErrorCode::VerificationFailedAllAttempts:
    case ErrorCode::RankDeficient:
    case ErrorCode::NoProgress:
    case ErrorCode::MaxIterationsExceeded:
      return true;
    default:
      return false;
  }
}

}  // namespace mmcast

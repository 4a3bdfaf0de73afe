#pragma once

#include <stdexcept>
#include <string>

namespace netmech {

enum class ErrorCode {
  NonPositiveLoss,
  SelfLoop,
  DuplicateEdge,
  NegativeDemand,
  IsolatedNode,
  FeasibilityViolation,
  ParamError,
  NegativeQuantity,
  OutOfRange,
  OutOfSupport,
  DiscernabilityViolation,
  NonPositiveMultiplier,
  BracketFailure,
  MaxIterExceeded,
  MonotonicityBreach,
  NotConverged,
  OutOfBox,
  QuadratureBudgetExceeded,
  ConfigError,
  IoError,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveLoss: return "NonPositiveLoss";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::DuplicateEdge: return "DuplicateEdge";
    case ErrorCode::NegativeDemand: return "NegativeDemand";
    case ErrorCode::IsolatedNode: return "IsolatedNode";
    case ErrorCode::FeasibilityViolation: return "FeasibilityViolation";
    case ErrorCode::ParamError: return "ParamError";
    case ErrorCode::NegativeQuantity: return "NegativeQuantity";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::OutOfSupport: return "OutOfSupport";
    case ErrorCode::DiscernabilityViolation: return "DiscernabilityViolation";
    case ErrorCode::NonPositiveMultiplier: return "NonPositiveMultiplier";
    case ErrorCode::BracketFailure: return "BracketFailure";
    case ErrorCode::MaxIterExceeded: return "MaxIterExceeded";
    case ErrorCode::MonotonicityBreach: return "MonotonicityBreach";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::OutOfBox: return "OutOfBox";
    case ErrorCode::QuadratureBudgetExceeded: return "QuadratureBudgetExceeded";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "UnknownError";
}

// All library failures surface as Error. `index` and `value` carry the
// offending node/agent/segment and the measured quantity when the code has
// one (e.g. FeasibilityViolation stores the node and the d - sum 1/(2r)
// slack that failed to be negative).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}
  Error(ErrorCode code, const std::string& message, int index, double value)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code), index_(index), value_(value) {}

  ErrorCode code() const { return code_; }
  int index() const { return index_; }
  double value() const { return value_; }

 private:
  ErrorCode code_;
  int index_ = -1;
  double value_ = 0.0;
};

}  // namespace netmech

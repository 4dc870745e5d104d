#include "parcell/errors.hpp"

namespace parcell {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::SingularA22: return "SingularA22";
    case ErrorCode::ImpulseUnobservable: return "ImpulseUnobservable";
    case ErrorCode::VoltageMismatch: return "VoltageMismatch";
    case ErrorCode::CycleGap: return "CycleGap";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DerivativeUnavailable: return "DerivativeUnavailable";
    case ErrorCode::OrderTooHigh: return "OrderTooHigh";
    case ErrorCode::UnsupportedN: return "UnsupportedN";
    case ErrorCode::EigSolverFailure: return "EigSolverFailure";
    case ErrorCode::SingularG22: return "SingularG22";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace parcell

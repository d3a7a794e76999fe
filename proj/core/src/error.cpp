#include "wegnerflow/error.hpp"

namespace wegnerflow {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::IndexOverflow: return "IndexOverflow";
    case ErrorCode::NoSuchBand: return "NoSuchBand";
    case ErrorCode::IntegratorFailure: return "IntegratorFailure";
    case ErrorCode::UnitarityDrift: return "UnitarityDrift";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::RouteMismatch: return "RouteMismatch";
    case ErrorCode::NonUnitaryFamily: return "NonUnitaryFamily";
    case ErrorCode::DegenerateMetric: return "DegenerateMetric";
    case ErrorCode::StationaryCurve: return "StationaryCurve";
    case ErrorCode::ConditionViolated: return "ConditionViolated";
    case ErrorCode::SpecViolation: return "SpecViolation";
    case ErrorCode::SingularShift: return "SingularShift";
    case ErrorCode::CoordinateOutOfDomain: return "CoordinateOutOfDomain";
    case ErrorCode::TruncationTooSmall: return "TruncationTooSmall";
    case ErrorCode::NotInFamily: return "NotInFamily";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace wegnerflow

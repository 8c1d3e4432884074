#include "resflow/errors.hpp"

namespace resflow {

const char* error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonSquare: return "NonSquare";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::RankMismatch: return "RankMismatch";
    case ErrorCode::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorCode::EvaluationFailure: return "EvaluationFailure";
    case ErrorCode::SingularResolvent: return "SingularResolvent";
    case ErrorCode::EndpointSingularity: return "EndpointSingularity";
    case ErrorCode::ResonantCoupling: return "ResonantCoupling";
    case ErrorCode::NotRegularizing: return "NotRegularizing";
    case ErrorCode::InconsistentProbes: return "InconsistentProbes";
    case ErrorCode::ContourTooClose: return "ContourTooClose";
    case ErrorCode::GroupingUnstable: return "GroupingUnstable";
    case ErrorCode::RealSplitPoint: return "RealSplitPoint";
    case ErrorCode::NotClassR: return "NotClassR";
    case ErrorCode::EndpointResonant: return "EndpointResonant";
    case ErrorCode::EigenvalueAtLambda: return "EigenvalueAtLambda";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::VectorNotInSpace: return "VectorNotInSpace";
    case ErrorCode::OrderMismatch: return "OrderMismatch";
    case ErrorCode::ConstructionFailed: return "ConstructionFailed";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownExample: return "UnknownExample";
  }
  return "Unknown";
}

bool is_conditioning_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::NumericalFailure:
    case ErrorCode::RankMismatch:
    case ErrorCode::QuadratureNotConverged:
    case ErrorCode::SingularResolvent:
    case ErrorCode::ResonantCoupling:
    case ErrorCode::InconsistentProbes:
    case ErrorCode::ContourTooClose:
    case ErrorCode::GroupingUnstable:
    case ErrorCode::RealSplitPoint:
    case ErrorCode::NotClassR:
    case ErrorCode::EigenvalueAtLambda:
    case ErrorCode::GridTooCoarse:
      return true;
    default:
      return false;
  }
}

}  // namespace resflow

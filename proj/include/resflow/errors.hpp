#pragma once

#include <stdexcept>
#include <string>

namespace resflow {

enum class ErrorCode {
  NonSquare,
  NumericalFailure,
  NotPSD,
  RankMismatch,
  QuadratureNotConverged,
  EvaluationFailure,
  SingularResolvent,
  EndpointSingularity,
  ResonantCoupling,
  NotRegularizing,
  InconsistentProbes,
  ContourTooClose,
  GroupingUnstable,
  RealSplitPoint,
  NotClassR,
  EndpointResonant,
  EigenvalueAtLambda,
  GridTooCoarse,
  VectorNotInSpace,
  OrderMismatch,
  ConstructionFailed,
  InvalidArgument,
  ParseError,
  UnknownExample,
};

const char* error_name(ErrorCode code);

// True for failures caused by floating-point conditioning rather than bad input.
bool is_conditioning_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace resflow

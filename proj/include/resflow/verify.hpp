#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "resflow/builtins.hpp"

namespace resflow {

struct TrialInstance {
  std::uint64_t seed = 0;
  FinitePencil pencil;
  double lambda = 0.0;
  SpectralPoint z;  // random off-axis point, Im z > 0
  double s = 0.0;   // random real coupling
};

// Deterministic in (seed, trial); dimension uniform in [dim_lo, dim_hi], rank(V) uniform in [1, n].
TrialInstance make_trial(std::uint64_t seed, int trial, int dim_lo, int dim_hi);

// Relative residuals of the idempotent algebra at every resonance point of z.
struct AlgebraResiduals {
  double idempotent = 0.0;  // |P^2 - P| / |P|
  double orthogonal = 0.0;  // |P_i P_j| / (|P_i| |P_j|)
  double intertwine = 0.0;  // |JP - QJ| / (|J| |P|)
  double nilpotent = 0.0;   // |nilA^d| / (|P| radius^d)
  double laurent = 0.0;     // A(s)P against its principal part
  double sigma_s = 0.0;     // sigma-plane versus s-plane idempotent
  int points = 0;
  double worst() const;
};

AlgebraResiduals idempotent_algebra(const OperatorModel& m, const SpectralPoint& z);

// Second resolvent identity A(r) - A(s) = (s - r) A(r) A(s), relative.
double resolvent_identity_residual(const OperatorModel& m, const SpectralPoint& z, cplx r, cplx s);

struct PositivityCheck {
  double min_eig_rel = 0.0;  // smallest eigenvalue of Im z Q J P over its norm
  int rank = 0;
  int rank_P = 0;
  int up_points = 0;
  bool ok(double tol = 1e-8) const { return min_eig_rel >= -tol && rank == rank_P; }
};

// Up-point set of z (all resonance points with Im r > 0).
PositivityCheck up_point_positivity(const OperatorModel& m, const SpectralPoint& z);

struct SignatureCheck {
  int signature = 0;
  int rindex = 0;
  bool ok() const { return signature == rindex; }
};

// Gamma = resonance points of z selected by the bits of `mask`.
SignatureCheck set_signature_vs_rindex(const OperatorModel& m, const SpectralPoint& z, std::uint64_t mask);

struct VerifyOptions {
  std::uint64_t seed = 42;
  int trials = 50;
  int dim_lo = 2;
  int dim_hi = 6;
  double tol_scale = 1.0;
  bool corrupt = false;  // shrink every tolerance to force failures (fault injection)
  int max_dumps = 3;
};

struct PropertyTally {
  std::string name;
  int passed = 0;
  int failed = 0;
  int errored = 0;  // declared conditioning errors
  std::vector<std::string> failures;
};

struct VerifySummary {
  std::vector<PropertyTally> properties;
  int trials = 0;
  bool all_passed() const;
  std::string text() const;
};

VerifySummary run_verify(const VerifyOptions& opt);

}  // namespace resflow

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "resflow/models.hpp"

namespace resflow {

struct EmbeddedDiagnostics {
  CVector u_hat_plus;
  CVector u_hat_minus;
  std::vector<cplx> a_plus;  // a_{j,+}, j = 0..j_max
  std::vector<cplx> a_minus;
  int order_predicted = 0;
  bool regularizing = false;
  std::function<cplx(const SpectralPoint&, cplx)> D_function;
};

// j_max < 0 selects order_predicted + 2 (searched up to dim + 2).
EmbeddedDiagnostics embedded_diagnostics(const EmbeddedModel& e, int j_max = -1);

struct ClosedFormIdempotents {
  CMatrix P_plus, P_minus;
  CMatrix nilA_plus, nilA_minus;
};

ClosedFormIdempotents closed_form_idempotents(const EmbeddedModel& e, int d);

struct RankOneSample {
  double y = 0.0;
  cplx sigma1, sigma2;  // eigenvalues of A_{lambda+iy}(s) from the quadratic
  cplx r1, r2;          // corresponding resonance points s - 1/sigma
};

struct RankOneAnalysis {
  double s = 0.0;
  std::vector<RankOneSample> samples;
  int n_plus = 0;
  int n_minus = 0;
  int index = 0;
  cplx slope;              // (r(y) - r_lambda) / y at the smallest y, group root
  bool slope_ok = false;   // within 5% of i/alpha (alpha != 0)
  bool opposite_half_planes = false;  // alpha = 0
  int model_index = 0;     // resonance_index of the assembled model
  bool index_matches = false;
};

RankOneAnalysis rank_one_index_analysis(const EmbeddedModel& e);

struct ConstructOptions {
  bool scramble = false;  // conjugate by a seeded random unitary
};

FinitePencil construct_finite_example(double lambda, int d, std::uint64_t seed, ConstructOptions opt = {});

// Embedded continuum instance over a three-channel base with order 1..4 at r_lambda.
EmbeddedModel embedded_continuum_example(int order, std::uint64_t seed, double r_lambda = 0.0);

// Scalar base [-1, 1], C = 1, J_hat = 0, psi_hat = 1, lambda = 0.
EmbeddedModel scalar_embedded_example(double alpha, double r_lambda = 0.0);
// Base J = 0, alpha = 0: order 2 with P+ P- = P+ yet P+ != P-.
EmbeddedModel decoupled_embedded_example(double r_lambda = 0.0);

}  // namespace resflow

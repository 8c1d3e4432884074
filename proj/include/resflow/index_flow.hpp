#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "resflow/resonance.hpp"

namespace resflow {

// N+ - N- over eigenvalues with |sigma| > zero_tol*|A|; throws NotClassR on a nonzero real eigenvalue.
int r_index(const CMatrix& a, double zero_tol = 1e-8, double real_tol = 1e-12);

// R-index over the `count` eigenvalues of largest modulus.
int r_index_top(const CMatrix& a, int count, double real_tol = 1e-12);

struct KreinCheck {
  int rindex = 0;
  int sign_v = 0;
  bool agree = false;
};

KreinCheck krein_sign_check(const FinitePencil& p, const SpectralPoint& z, double s);

struct ResonanceMatrices {
  CMatrix m_minus_plus;  // Q_{l-i0} J P_{l+i0}
  CMatrix m_plus_minus;  // Q_{l+i0} J P_{l-i0}
  Signature sig_minus_plus;
  Signature sig_plus_minus;
  double hermitian_residual = 0.0;
};

ResonanceMatrices resonance_matrix(const OperatorModel& m, const GroupSplitting& g, bool strict = true);
ResonanceMatrices resonance_matrix(const OperatorModel& m, double lambda, double r_lambda, bool strict = true);

struct IndexReport {
  double lambda = 0.0;
  double r_lambda = 0.0;
  int ind_splitting = 0;
  int ind_rindex = 0;
  int ind_signature = 0;
  int N_plus = 0;
  int N_minus = 0;
  int N = 0;
  int order_d = 0;
  int dim_upsilon1 = 0;
  bool uturn_ok = false;
  bool consistency = false;
  std::vector<std::string> diagnostics;
  GroupSplitting group;
  ResonanceMatrices matrices;

  int index() const { return ind_splitting; }
};

IndexReport resonance_index(const OperatorModel& m, double lambda, double r_lambda, bool strict = true);

struct FlowReport {
  double lambda = 0.0;
  double a = 0.0;
  double b = 1.0;
  std::vector<IndexReport> per_point;
  int total = 0;
  std::optional<int> ssf_value;
  std::optional<int> tracking_value;
  bool agreement = true;
  std::vector<std::string> diagnostics;
};

// Real resonance points at lambda+i0 with a < r < b.
std::vector<double> real_resonance_points(const OperatorModel& m, double lambda, double a, double b);

FlowReport total_resonance_index(const OperatorModel& m, double lambda, double a, double b, bool strict = true);

int ssf_counting(const FinitePencil& p, double lambda, double a, double b);
int spectral_flow_oracle(const FinitePencil& p, double lambda, double a, double b, int grid = 64);

}  // namespace resflow

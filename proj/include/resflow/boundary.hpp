#pragma once

#include <string>
#include <vector>

#include "resflow/resonance.hpp"

namespace resflow {

enum class TypeI { yes, no, indeterminate };
const char* type_i_name(TypeI t);

struct BoundaryData {
  double lambda = 0.0;
  double r_lambda = 0.0;
  ResonancePointRecord plus;   // at lambda + i0
  ResonancePointRecord minus;  // at lambda - i0
};

BoundaryData boundary_data(const OperatorModel& m, double lambda, double r_lambda);

struct CCoefficients {
  std::vector<double> c;  // c[0] = c_{+-2}, c[1] = c_{+-3}, ...
  int order = 0;
  double fit_residual = 0.0;  // sampled rational function vs the coefficients
};

// sign = +1 for lambda+i0, -1 for lambda-i0.
CCoefficients c_coefficients(const OperatorModel& m, const BoundaryData& bd, const CVector& u, int sign);
CCoefficients c_coefficients(const OperatorModel& m, double lambda, double r_lambda, const CVector& u, int sign);

struct TypeISpace {
  CMatrix basis;
  double chain_equality_residual = 0.0;  // max over basis of |nilA+^j u - nilA-^j u|
  bool contains_order1 = true;
  bool nilA_invariant = true;
};

TypeISpace type_I_space(const OperatorModel& m, const BoundaryData& bd);
TypeISpace type_I_space(const OperatorModel& m, double lambda, double r_lambda);

struct DepthEntry {
  int chain = 0;
  int order = 0;
  int depth = 0;
};

struct DepthReport {
  CMatrix jordan_basis;  // columns in chain order, top vector last within each chain
  std::vector<DepthEntry> table;
  CMatrix clLw_basis;   // span of Jordan vectors with depth >= order
  CMatrix L_basis;      // property L: order <= depth (+1 when order+depth is odd)
  double orthogonality_residual = 0.0;    // max |<u_i, J u_j>| over clLw
  double L_orthogonality_residual = 0.0;  // same over the property-L space
  int geom_mult = 0;
  int N = 0;
};

DepthReport depth_and_L(const OperatorModel& m, const BoundaryData& bd);
DepthReport depth_and_L(const OperatorModel& m, double lambda, double r_lambda);

struct BoundaryClassification {
  TypeI type_I_point = TypeI::no;
  double type_I_measure = 0.0;
  bool property_S = false;
  bool property_P = false;
  int dim_type_I_space = 0;
  bool pp_spectrum_ok = false;
  std::vector<cplx> pp_eigenvalues;
  bool property_M = false;
  double delta_jp_delta = 0.0;
  double S_consequence_residual = 0.0;  // Q+Q- = Q-, Q-JP+ = JP+ etc. when property S holds
  int dim_upsilon_intersection = 0;
  std::vector<DepthEntry> depth_table;
  int clLw_dim = 0;
  int L_dim = 0;
  int N = 0;
  int geom_mult = 0;
  bool outside_essential = false;
  std::vector<std::string> diagnostics;
};

BoundaryClassification classify_point(const OperatorModel& m, const BoundaryData& bd);
BoundaryClassification classify_point(const OperatorModel& m, double lambda, double r_lambda);

}  // namespace resflow

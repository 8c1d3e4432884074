#pragma once

#include <array>
#include <variant>
#include <vector>

#include "resflow/linalg.hpp"

namespace resflow {

enum class Side { off_axis, plus_i0, minus_i0 };

struct SpectralPoint {
  double lambda = 0.0;
  double y = 0.0;
  Side side = Side::off_axis;

  static SpectralPoint off_axis(double lambda, double y);
  static SpectralPoint plus(double lambda) { return {lambda, 0.0, Side::plus_i0}; }
  static SpectralPoint minus(double lambda) { return {lambda, 0.0, Side::minus_i0}; }
  static SpectralPoint from(cplx z) { return off_axis(z.real(), z.imag()); }

  bool is_boundary() const { return side != Side::off_axis; }
  // Complex value; boundary points return the real lambda.
  cplx z() const { return {lambda, y}; }
  SpectralPoint conj() const;
  // +1 for the upper half-plane or lambda+i0, -1 otherwise.
  int half_plane() const;
};

struct FinitePencil {
  HermitianMatrix h0;
  CMatrix f;
  HermitianMatrix j;
  HermitianMatrix v;

  // F = identity, J = V.
  static FinitePencil make(const HermitianMatrix& h0, const HermitianMatrix& v);
  static FinitePencil make_rigged(const HermitianMatrix& h0, const CMatrix& f, const HermitianMatrix& j);

  Eigen::Index dim() const { return h0.size(); }
  CMatrix h(cplx s) const { return h0.matrix() + s * v.matrix(); }
};

struct Interval {
  double a = 0.0;
  double b = 1.0;
  HermitianMatrix c;
};

struct ContinuumModel {
  std::vector<Interval> intervals;
  HermitianMatrix j;

  static ContinuumModel make(std::vector<Interval> intervals, const HermitianMatrix& j);
  Eigen::Index dim() const { return j.size(); }
  bool in_essential_interior(double lambda) const;
};

struct EmbeddedModel {
  ContinuumModel base;
  CVector psi_hat;
  double alpha = 0.0;
  double lambda = 0.0;
  double r_lambda = 0.0;

  Eigen::Index dim() const { return base.dim() + 1; }
  HermitianMatrix j_full() const;
};

using OperatorModel = std::variant<FinitePencil, ContinuumModel, EmbeddedModel>;

const HermitianMatrix& model_J(const OperatorModel& m);
HermitianMatrix model_J_full(const OperatorModel& m);
Eigen::Index model_dim(const OperatorModel& m);
bool has_essential_spectrum_at(const OperatorModel& m, double lambda);
const char* model_kind(const OperatorModel& m);

// Default non-resonant probe candidates for "some s".
inline constexpr std::array<double, 5> kProbeList = {0.0, 1.0, -1.0, 0.5, 0.3141592653589793};

CMatrix finite_T(const FinitePencil& p, const SpectralPoint& z, cplx s);
CMatrix continuum_base_T(const ContinuumModel& c, const SpectralPoint& z);
// T_z(H_s) from the resolvent identity around the base coupling s0.
CMatrix continuum_T(const ContinuumModel& c, const SpectralPoint& z, cplx s, double s0 = 0.0);
CMatrix embedded_T(const EmbeddedModel& e, const SpectralPoint& z, cplx s);
CMatrix model_T(const OperatorModel& m, const SpectralPoint& z, cplx s);

struct OpPair {
  CMatrix a;
  CMatrix b;
};
OpPair op_A(const OperatorModel& m, const SpectralPoint& z, cplx s);
CMatrix op_A_only(const OperatorModel& m, const SpectralPoint& z, cplx s);

// (T_z - T_{conj z}) / 2i at the same coupling s.
CMatrix im_T(const OperatorModel& m, const SpectralPoint& z, cplx s);

// Condition measure of the coupling factor at (z, s); large means s is near resonant.
double coupling_condition(const OperatorModel& m, const SpectralPoint& z, cplx s);

// First entry of the probe list (shifted by `offset`) with condition below cond_cap.
double choose_probe(const OperatorModel& m, const SpectralPoint& z, double cond_cap = 1e8,
                    double offset = 0.0);

EmbeddedModel embed_eigenvalue(const ContinuumModel& base, const CVector& psi_hat, double alpha,
                               double lambda, double r_lambda);

}  // namespace resflow

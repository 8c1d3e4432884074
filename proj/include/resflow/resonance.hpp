#pragma once

#include <optional>
#include <vector>

#include "resflow/models.hpp"

namespace resflow {

struct Disk {
  cplx center;
  double radius;
  bool contains(cplx w) const { return std::abs(w - center) < radius; }
};

struct ResonancePoint {
  cplx r;
  int alg_mult = 1;
};

struct FindOptions {
  bool check_probes = true;
  double cluster_tol = 1e-8;
};

std::vector<ResonancePoint> find_resonance_points(const OperatorModel& m, const SpectralPoint& z, cplx s,
                                                  std::optional<Disk> region = std::nullopt,
                                                  const FindOptions& opt = {});

// Uses a probe from the default probe list.
std::vector<ResonancePoint> find_resonance_points(const OperatorModel& m, const SpectralPoint& z,
                                                  std::optional<Disk> region = std::nullopt,
                                                  const FindOptions& opt = {});

// Laurent data of A_z and B_z at an isolated pole, from one s-plane contour.
struct LaurentData {
  cplx r;
  double radius = 0.0;
  CMatrix P, Q;
  std::vector<CMatrix> nilA_pow;  // nilA_pow[j] = (1/2pi i) \oint (s-r)^j A ds, j = 0..kmax
  std::vector<CMatrix> nilB_pow;
  int nodes = 0;
};

// Half the distance to the nearest other resonance point (capped), for an s-plane contour.
double isolation_radius(const OperatorModel& m, const SpectralPoint& z, cplx r, const FindOptions& opt = {});

LaurentData laurent_data(const OperatorModel& m, const SpectralPoint& z, cplx r, double radius, int kmax);

struct Idempotents {
  CMatrix P;
  CMatrix Q;
  double residual = 0.0;  // disagreement of sigma-plane and s-plane computations
};

Idempotents riesz_idempotents(const OperatorModel& m, const SpectralPoint& z, cplx r);

// Sigma-plane Riesz projector of A_z(s0) around 1/(s0 - r).
CMatrix sigma_plane_projector(const OperatorModel& m, const SpectralPoint& z, cplx r, double s_radius);

struct Nilpotents {
  CMatrix nilA;
  CMatrix nilB;
};

Nilpotents nilpotents(const OperatorModel& m, const SpectralPoint& z, cplx r);

// Orthonormal basis of ker (1 + (r - s) A_z(s))^k.
CMatrix resonance_space(const OperatorModel& m, const SpectralPoint& z, cplx s, cplx r, int k);

struct ResonancePointRecord {
  cplx r;
  int order_d = 0;
  int geom_mult_m = 0;
  int alg_mult_N = 0;
  CMatrix P, Q, nilA, nilB;
  std::vector<CMatrix> upsilon_bases;  // index k-1 -> basis of Upsilon^k
  std::vector<int> jordan_chain_lengths;
  std::vector<CMatrix> nilA_pow;
  double sigma_s_residual = 0.0;
  double radius = 0.0;
  double probe_s = 0.0;
  std::vector<std::string> diagnostics;
};

ResonancePointRecord point_structure(const OperatorModel& m, const SpectralPoint& z, cplx r);

// Jordan chain lengths of a nilpotent restricted to the range of P, from the rank staircase.
std::vector<int> chain_lengths_from_ranks(const std::vector<int>& ranks);

struct SplitPoint {
  cplx r;
  int mult = 1;
};

struct GroupSplitting {
  double r_lambda = 0.0;
  double y_used = 0.0;
  double ball_radius = 0.0;
  std::vector<SplitPoint> split_points;
  std::vector<SplitPoint> split_points_conj;  // group at lambda - iy
  int N_plus = 0;
  int N_minus = 0;
  int N = 0;
  CMatrix P_plus_i0, P_minus_i0, Q_plus_i0, Q_minus_i0, nilA_plus_i0, nilA_minus_i0;
  CMatrix P_group;  // group idempotent at lambda + iy
  ResonancePointRecord plus_record;
  ResonancePointRecord minus_record;
  double extrapolation_residual = 0.0;
  double contour_identity_residual = 0.0;
  std::vector<std::string> diagnostics;
};

// Group idempotent P_{lambda+iy}(group) around a ball centred at r.
CMatrix group_idempotent(const OperatorModel& m, const SpectralPoint& z, cplx center, double radius);

// Distance from r to the nearest other resonance point at lambda+i0 (infinity if none).
double nearest_other_distance(const OperatorModel& m, double lambda, double r);

GroupSplitting group_splitting(const OperatorModel& m, double lambda, double r_lambda,
                               std::optional<double> y = std::nullopt);

}  // namespace resflow

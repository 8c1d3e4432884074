#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "resflow/errors.hpp"

namespace resflow {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kEps = 2.220446049250313e-16;

struct Tolerances {
  double herm = 1e-10;
  double rank_floor = 1e-10;
  double zero = 1e-8;
  double quad = 1e-10;
  double cluster = 1e-8;
  double psd = 1e-8;
  double cond_cap = 1e8;
  int node_cap = 4096;

  Tolerances scaled(double factor) const;
};

// Square matrix stored symmetrized; construction rejects non-Hermitian input.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(const CMatrix& a, double tol_herm = 1e-10);

  static HermitianMatrix identity(Eigen::Index n);
  static HermitianMatrix zero(Eigen::Index n);
  static HermitianMatrix diagonal(const std::vector<double>& d);

  const CMatrix& matrix() const { return m_; }
  Eigen::Index size() const { return m_.rows(); }
  operator const CMatrix&() const { return m_; }

 private:
  CMatrix m_;
};

void require_finite(const CMatrix& a, const char* what);

double norm2(const CMatrix& a);
double max_abs(const CMatrix& a);

struct EigenEntry {
  cplx value;
  int multiplicity = 1;
};

struct EigenPairs {
  std::vector<EigenEntry> values;
  CMatrix vectors;  // one representative eigenvector per entry
  double cluster_tol = 1e-8;

  int total_multiplicity() const;
};

EigenPairs eig_general(const CMatrix& a, double cluster_tol = 1e-8);

// Raw eigenvalues, unclustered.
std::vector<cplx> eigenvalues(const CMatrix& a);

struct Cluster {
  cplx center;
  std::vector<cplx> members;
  int size() const { return static_cast<int>(members.size()); }
};

// Groups eigenvalues of `a` that belong to one numerically split defective
// eigenvalue. Candidates closer than scale*eps^(1/k) are merged when the
// cluster passes a Jordan test ||(A - mu)^k P|| ~ 0 on its spectral projector.
std::vector<Cluster> cluster_spectrum(const CMatrix& a, const std::vector<cplx>& eigs,
                                      double cluster_tol = 1e-8);

struct HermitianEig {
  RVector values;
  CMatrix vectors;
};

HermitianEig eig_hermitian(const HermitianMatrix& a);

CMatrix kernel_basis(const CMatrix& a, double tol_rank = -1.0);
int numerical_rank(const CMatrix& a, double tol_rank = -1.0);
double default_rank_tol(Eigen::Index n);
double smallest_singular_value(const CMatrix& a);
double condition_number(const CMatrix& a);

// Orthonormal basis of the column space.
CMatrix range_basis(const CMatrix& a, double tol_rank = -1.0);

HermitianMatrix hermitian_sqrt(const HermitianMatrix& a, double psd_tol = 1e-8);

struct Signature {
  int n_plus = 0;
  int n_minus = 0;
  bool ill_conditioned = false;
  int sign() const { return n_plus - n_minus; }
  int rank() const { return n_plus + n_minus; }
};

Signature signature(const HermitianMatrix& m, double zero_tol = 1e-8,
                    std::optional<int> expected_rank = std::nullopt, bool strict = false);

using MatrixFunction = std::function<CMatrix(cplx)>;

struct ContourResult {
  CMatrix value;
  int nodes = 0;
  double last_change = 0.0;
};

// (1/2 pi i) times the contour integral over |zeta - center| = radius,
// trapezoid rule with node doubling until the max-norm change drops below quad_tol.
ContourResult circle_integral_adaptive(const MatrixFunction& f, cplx center, double radius,
                                       int nodes = 16, double quad_tol = 1e-10,
                                       int node_cap = 4096);

CMatrix circle_integral(const MatrixFunction& f, cplx center, double radius, int nodes = 16,
                        double quad_tol = 1e-10);

CMatrix matrix_power(const CMatrix& a, int k);

}  // namespace resflow

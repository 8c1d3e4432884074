#include "resflow/linalg.hpp"

#include <cstdio>
#include <functional>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace resflow {

Tolerances Tolerances::scaled(double factor) const {
  Tolerances t = *this;
  t.herm *= factor;
  t.rank_floor *= factor;
  t.zero *= factor;
  t.quad *= factor;
  t.cluster *= factor;
  t.psd *= factor;
  return t;
}

void require_finite(const CMatrix& a, const char* what) {
  if (a.rows() < 1 || a.cols() < 1)
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " is empty");
  if (!a.allFinite()) throw Error(ErrorCode::InvalidArgument, std::string(what) + " has non-finite entries");
}

double norm2(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(a);
  return svd.singularValues()(0);
}

double max_abs(const CMatrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

HermitianMatrix::HermitianMatrix(const CMatrix& a, double tol_herm) {
  if (a.rows() != a.cols()) throw Error(ErrorCode::NonSquare, "Hermitian matrix must be square");
  require_finite(a, "Hermitian matrix");
  double skew = (a - a.adjoint()).norm();
  if (skew > tol_herm * std::max(1.0, a.norm()))
    throw Error(ErrorCode::InvalidArgument, "matrix is not Hermitian (skew part " + std::to_string(skew) + ")");
  m_ = (a + a.adjoint()) / 2.0;
}

HermitianMatrix HermitianMatrix::identity(Eigen::Index n) {
  return HermitianMatrix(CMatrix::Identity(n, n));
}

HermitianMatrix HermitianMatrix::zero(Eigen::Index n) { return HermitianMatrix(CMatrix::Zero(n, n)); }

HermitianMatrix HermitianMatrix::diagonal(const std::vector<double>& d) {
  CMatrix m = CMatrix::Zero(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return HermitianMatrix(m);
}

int EigenPairs::total_multiplicity() const {
  int s = 0;
  for (const auto& e : values) s += e.multiplicity;
  return s;
}

std::vector<cplx> eigenvalues(const CMatrix& a) {
  if (a.rows() != a.cols()) throw Error(ErrorCode::NonSquare, "eigenvalues of non-square matrix");
  require_finite(a, "matrix");
  Eigen::ComplexEigenSolver<CMatrix> es(a, false);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::NumericalFailure, "eigenvalue iteration did not converge");
  std::vector<cplx> out(es.eigenvalues().data(), es.eigenvalues().data() + a.rows());
  return out;
}

CMatrix matrix_power(const CMatrix& a, int k) {
  CMatrix r = CMatrix::Identity(a.rows(), a.cols());
  for (int i = 0; i < k; ++i) r = r * a;
  return r;
}

namespace {

cplx centroid(const std::vector<cplx>& v) {
  cplx s = 0.0;
  for (auto x : v) s += x;
  return s / static_cast<double>(v.size());
}

double cluster_radius(const std::vector<cplx>& v, cplx c) {
  double r = 0.0;
  for (auto x : v) r = std::max(r, std::abs(x - c));
  return r;
}

// Spectral projector of `a` for the eigenvalues inside |zeta - c| < rho.
CMatrix resolvent_projector(const CMatrix& a, cplx c, double rho) {
  const auto n = a.rows();
  auto f = [&](cplx zeta) -> CMatrix {
    CMatrix m = zeta * CMatrix::Identity(n, n) - a;
    return m.partialPivLu().inverse();
  };
  for (double tol : {1e-12, 1e-9, 1e-6}) {
    try {
      return circle_integral_adaptive(f, c, rho, 32, tol, 4096).value;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::QuadratureNotConverged || tol == 1e-6) throw;
    }
  }
  return {};
}

bool passes_jordan_test(const CMatrix& a, const std::vector<Cluster>& all, const std::vector<std::size_t>& group,
                        double scale, const std::function<double(cplx)>& kappa) {
  std::vector<cplx> members;
  for (auto g : group) members.insert(members.end(), all[g].members.begin(), all[g].members.end());
  const int k = static_cast<int>(members.size());
  cplx mu = centroid(members);
  double rad = cluster_radius(members, mu);
  if (rad > 1e3 * scale * std::pow(kEps, 1.0 / k)) return false;
  // rounding must be able to explain the spread through the member conditioning
  double kmin = std::numeric_limits<double>::infinity();
  for (auto g : group) {
    double kmax = 0.0;
    for (auto x : all[g].members) kmax = std::max(kmax, kappa(x));
    kmin = std::min(kmin, kmax);
  }
  if (rad > 1e3 * kmin * kEps * scale) return false;
  double d_out = std::numeric_limits<double>::infinity();
  for (std::size_t q = 0; q < all.size(); ++q) {
    if (std::find(group.begin(), group.end(), q) != group.end()) continue;
    for (auto x : all[q].members) d_out = std::min(d_out, std::abs(x - mu));
  }
  if (!(d_out > 3.0 * rad)) return false;
  double rho = std::isfinite(d_out) ? 0.5 * d_out : scale;
  rho = std::max(rho, 1.5 * rad);
  CMatrix p;
  try {
    p = resolvent_projector(a, mu, rho);
  } catch (const Error&) {
    return false;
  }
  CMatrix shifted = a - mu * CMatrix::Identity(a.rows(), a.cols());
  CMatrix test = matrix_power(shifted, k) * p;
  double pn = std::max(1.0, norm2(p));
  return norm2(test) <= 1e-9 * std::pow(scale, k) * pn;
}

}  // namespace

std::vector<Cluster> cluster_spectrum(const CMatrix& a, const std::vector<cplx>& eigs, double cluster_tol) {
  double scale = std::max(norm2(a), std::numeric_limits<double>::min());
  // eigenvalue condition 1/|y* x| from the extreme singular pair of A - x
  auto kappa = [&](cplx x) {
    const auto n = a.rows();
    Eigen::JacobiSVD<CMatrix> svd(a - x * CMatrix::Identity(n, n), Eigen::ComputeFullU | Eigen::ComputeFullV);
    cplx c = svd.matrixU().col(n - 1).dot(svd.matrixV().col(n - 1));
    return std::abs(c) > 0 ? 1.0 / std::abs(c) : std::numeric_limits<double>::infinity();
  };
  std::vector<Cluster> clusters;
  // plain clustering by relative distance
  std::vector<int> owner(eigs.size(), -1);
  for (std::size_t i = 0; i < eigs.size(); ++i) {
    if (owner[i] >= 0) continue;
    owner[i] = static_cast<int>(clusters.size());
    Cluster c;
    c.members.push_back(eigs[i]);
    for (std::size_t j = i + 1; j < eigs.size(); ++j) {
      if (owner[j] >= 0) continue;
      for (auto x : c.members) {
        if (std::abs(eigs[j] - x) <= cluster_tol * scale) {
          owner[j] = owner[i];
          c.members.push_back(eigs[j]);
          break;
        }
      }
    }
    c.center = centroid(c.members);
    clusters.push_back(std::move(c));
  }
  // defect-aware merging: grow each cluster by its nearest neighbours
  bool merged = true;
  while (merged && clusters.size() > 1) {
    merged = false;
    for (std::size_t i = 0; i < clusters.size() && !merged; ++i) {
      std::vector<std::size_t> order;
      for (std::size_t j = 0; j < clusters.size(); ++j)
        if (j != i) order.push_back(j);
      std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return std::abs(clusters[x].center - clusters[i].center) < std::abs(clusters[y].center - clusters[i].center);
      });
      std::vector<std::size_t> group{i};
      for (auto j : order) {
        group.push_back(j);
        if (passes_jordan_test(a, clusters, group, scale, kappa)) {
          Cluster c;
          for (auto g : group) c.members.insert(c.members.end(), clusters[g].members.begin(), clusters[g].members.end());
          c.center = centroid(c.members);
          std::sort(group.rbegin(), group.rend());
          for (auto g : group) clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(g));
          clusters.push_back(std::move(c));
          merged = true;
          break;
        }
      }
    }
  }
  return clusters;
}

EigenPairs eig_general(const CMatrix& a, double cluster_tol) {
  auto eigs = eigenvalues(a);
  auto clusters = cluster_spectrum(a, eigs, cluster_tol);
  EigenPairs out;
  out.cluster_tol = cluster_tol;
  const auto n = a.rows();
  out.vectors.resize(n, static_cast<Eigen::Index>(clusters.size()));
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    out.values.push_back({clusters[i].center, clusters[i].size()});
    CMatrix shifted = a - clusters[i].center * CMatrix::Identity(n, n);
    Eigen::JacobiSVD<CMatrix> svd(shifted, Eigen::ComputeFullV);
    out.vectors.col(static_cast<Eigen::Index>(i)) = svd.matrixV().col(n - 1);
  }
  return out;
}

HermitianEig eig_hermitian(const HermitianMatrix& a) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(a.matrix());
  if (es.info() != Eigen::Success) throw Error(ErrorCode::NumericalFailure, "Hermitian eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

double default_rank_tol(Eigen::Index n) { return std::max(static_cast<double>(n) * kEps, 1e-10); }

namespace {
Eigen::JacobiSVD<CMatrix> full_svd(const CMatrix& a) {
  require_finite(a, "matrix");
  return Eigen::JacobiSVD<CMatrix>(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
}

int rank_from(const RVector& sv, double tol) {
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tol * sv(0)) ++r;
  return r;
}
}  // namespace

int numerical_rank(const CMatrix& a, double tol_rank) {
  if (tol_rank < 0) tol_rank = default_rank_tol(std::max(a.rows(), a.cols()));
  Eigen::JacobiSVD<CMatrix> svd(a);
  return rank_from(svd.singularValues(), tol_rank);
}

CMatrix kernel_basis(const CMatrix& a, double tol_rank) {
  if (tol_rank < 0) tol_rank = default_rank_tol(std::max(a.rows(), a.cols()));
  auto svd = full_svd(a);
  int r = rank_from(svd.singularValues(), tol_rank);
  const auto n = a.cols();
  return svd.matrixV().rightCols(n - r);
}

CMatrix range_basis(const CMatrix& a, double tol_rank) {
  if (tol_rank < 0) tol_rank = default_rank_tol(std::max(a.rows(), a.cols()));
  auto svd = full_svd(a);
  int r = rank_from(svd.singularValues(), tol_rank);
  return svd.matrixU().leftCols(r);
}

double smallest_singular_value(const CMatrix& a) {
  Eigen::JacobiSVD<CMatrix> svd(a);
  const auto& sv = svd.singularValues();
  return sv(sv.size() - 1);
}

double condition_number(const CMatrix& a) {
  Eigen::JacobiSVD<CMatrix> svd(a);
  const auto& sv = svd.singularValues();
  double lo = sv(sv.size() - 1);
  if (lo == 0.0) return std::numeric_limits<double>::infinity();
  return sv(0) / lo;
}

HermitianMatrix hermitian_sqrt(const HermitianMatrix& a, double psd_tol) {
  auto e = eig_hermitian(a);
  double scale = e.values.cwiseAbs().maxCoeff();
  RVector d = e.values;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d(i) < -psd_tol * scale)
      throw Error(ErrorCode::NotPSD, "eigenvalue " + std::to_string(d(i)) + " below -psd_tol*|A|");
    d(i) = std::sqrt(std::max(d(i), 0.0));
  }
  CMatrix r = e.vectors * d.cast<cplx>().asDiagonal() * e.vectors.adjoint();
  return HermitianMatrix((r + r.adjoint()) / 2.0);
}

Signature signature(const HermitianMatrix& m, double zero_tol, std::optional<int> expected_rank, bool strict) {
  auto e = eig_hermitian(m);
  double scale = e.values.size() ? e.values.cwiseAbs().maxCoeff() : 0.0;
  Signature s;
  for (Eigen::Index i = 0; i < e.values.size(); ++i) {
    if (e.values(i) > zero_tol * scale) ++s.n_plus;
    else if (e.values(i) < -zero_tol * scale) ++s.n_minus;
  }
  if (expected_rank && s.rank() != *expected_rank) {
    s.ill_conditioned = true;
    if (strict)
      throw Error(ErrorCode::RankMismatch, "signature rank " + std::to_string(s.rank()) + " but expected " +
                                               std::to_string(*expected_rank));
  }
  return s;
}

ContourResult circle_integral_adaptive(const MatrixFunction& f, cplx center, double radius, int nodes,
                                       double quad_tol, int node_cap) {
  if (nodes < 8 || (nodes & (nodes - 1)) != 0)
    throw Error(ErrorCode::InvalidArgument, "node count must be a power of two >= 8");
  if (!(radius > 0)) throw Error(ErrorCode::InvalidArgument, "contour radius must be positive");
  double peak = 0.0;
  auto eval = [&](double theta) -> CMatrix {
    cplx w = std::polar(radius, theta);
    CMatrix v;
    try {
      v = f(center + w);
    } catch (const Error& e) {
      throw Error(ErrorCode::EvaluationFailure, std::string("contour node: ") + e.what());
    }
    if (!v.allFinite()) throw Error(ErrorCode::EvaluationFailure, "non-finite value at contour node");
    peak = std::max(peak, max_abs(v) * radius);
    return v * w;
  };
  const double two_pi = 2.0 * std::numbers::pi;
  int n = nodes;
  CMatrix sum = eval(0.0);
  for (int k = 1; k < n; ++k) sum += eval(two_pi * k / n);
  CMatrix current = sum / static_cast<double>(n);
  double change = std::numeric_limits<double>::infinity();
  double prev = change;
  while (n < node_cap) {
    CMatrix extra = CMatrix::Zero(current.rows(), current.cols());
    for (int k = 0; k < n; ++k) extra += eval(two_pi * (k + 0.5) / n);
    sum += extra;
    n *= 2;
    CMatrix next = sum / static_cast<double>(n);
    change = max_abs(next - current);
    current = std::move(next);
    // rounding in the node values bounds the attainable accuracy
    double floor = 64.0 * kEps * peak;
    double size = std::max(1.0, max_abs(current));
    if (change < std::max(quad_tol * size, floor)) return {current, n, change};
    // stagnation: further doubling only resamples the rounding noise
    if (n >= 256 && change > 0.5 * prev && change < std::sqrt(quad_tol) * size) return {current, n, change};
    prev = change;
  }
  char msg[200];
  std::snprintf(msg, sizeof msg, "contour |z-(%.6g%+.6gi)|=%.3g: change %.3g (result %.3g, node peak %.3g) at %d nodes",
                center.real(), center.imag(), radius, change, max_abs(current), peak, n);
  throw Error(ErrorCode::QuadratureNotConverged, msg);
}

CMatrix circle_integral(const MatrixFunction& f, cplx center, double radius, int nodes, double quad_tol) {
  return circle_integral_adaptive(f, center, radius, nodes, quad_tol).value;
}

}  // namespace resflow

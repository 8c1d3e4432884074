#include "resflow/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace resflow {

const char* type_i_name(TypeI t) {
  switch (t) {
    case TypeI::yes: return "yes";
    case TypeI::no: return "no";
    default: return "indeterminate";
  }
}

BoundaryData boundary_data(const OperatorModel& m, double lambda, double r_lambda) {
  return {lambda, r_lambda, point_structure(m, SpectralPoint::plus(lambda), r_lambda),
          point_structure(m, SpectralPoint::minus(lambda), r_lambda)};
}

namespace {

std::vector<double> probes(const OperatorModel& m, const BoundaryData& bd) {
  std::vector<double> out;
  double rho = bd.plus.radius;
  for (double t : {1.0, -0.7, 0.55, -0.4}) {
    double s = bd.r_lambda + t * rho;
    if (coupling_condition(m, SpectralPoint::plus(bd.lambda), s) < 1e10 &&
        coupling_condition(m, SpectralPoint::minus(bd.lambda), s) < 1e10)
      out.push_back(s);
    if (out.size() == 2) break;
  }
  if (out.size() < 2) throw Error(ErrorCode::ResonantCoupling, "no non-resonant probes near the point");
  return out;
}

CMatrix im_T_boundary(const OperatorModel& m, double lambda, double s) {
  return im_T(m, SpectralPoint::plus(lambda), s);
}

CMatrix orthonormalize(const CMatrix& a) {
  if (a.cols() == 0) return a;
  return range_basis(a, 1e-9);
}

int vector_order(const CMatrix& nil, const CVector& u, int dmax) {
  double scale = std::max(1.0, norm2(nil));
  CVector w = u;
  for (int k = 0; k <= dmax; ++k) {
    if (w.norm() <= 1e-7 * u.norm() * std::pow(scale, k)) return k;
    w = nil * w;
  }
  return dmax + 1;
}

double rel(const CMatrix& x, double scale) { return max_abs(x) / std::max(scale, 1e-300); }

}  // namespace

CCoefficients c_coefficients(const OperatorModel& m, const BoundaryData& bd, const CVector& u, int sign) {
  const auto& rec = sign > 0 ? bd.plus : bd.minus;
  if ((rec.P * u - u).norm() > 1e-7 * std::max(1.0, norm2(rec.P)) * u.norm())
    throw Error(ErrorCode::VectorNotInSpace, "vector is not in the resonance space");
  const CMatrix j = model_J_full(m).matrix();
  CCoefficients out;
  out.order = vector_order(rec.nilA, u, rec.order_d);
  CVector w = u;
  for (int jj = 2; jj <= out.order; ++jj) {
    w = rec.nilA * w;
    out.c.push_back(u.dot(j * w).imag());
  }
  // two-route check: sample s -> <Ju, Im T Ju> and fit sum c_j (s-r)^{-j}
  auto z = sign > 0 ? SpectralPoint::plus(bd.lambda) : SpectralPoint::minus(bd.lambda);
  int k = std::max(out.order, 2);
  int samples = 2 * k;
  std::vector<double> ss;
  for (int i = 0; i < 4 * samples && static_cast<int>(ss.size()) < samples; ++i) {
    double t = (i % 2 ? -1.0 : 1.0) * (0.35 + 0.6 * (i / 2) / samples);
    double s = bd.r_lambda + t * rec.radius;
    if (coupling_condition(m, z, s) < 1e10) ss.push_back(s);
  }
  Eigen::MatrixXd design(ss.size(), std::max(k - 1, 1));
  Eigen::VectorXd rhs(ss.size());
  CVector ju = j * u;
  for (std::size_t i = 0; i < ss.size(); ++i) {
    CMatrix t = model_T(m, z, ss[i]);
    rhs(i) = ju.dot(t * ju).imag();
    for (int jj = 2; jj <= std::max(k, 2); ++jj)
      design(i, jj - 2) = std::pow(ss[i] - bd.r_lambda, -jj);
  }
  Eigen::VectorXd pred = Eigen::VectorXd::Zero(rhs.size());
  for (std::size_t jj = 0; jj < out.c.size(); ++jj) pred += out.c[jj] * design.col(jj);
  double scale = std::max({rhs.cwiseAbs().maxCoeff(), pred.cwiseAbs().maxCoeff(), u.squaredNorm() * norm2(j)});
  out.fit_residual = (rhs - pred).cwiseAbs().maxCoeff() / scale;
  return out;
}

CCoefficients c_coefficients(const OperatorModel& m, double lambda, double r_lambda, const CVector& u, int sign) {
  return c_coefficients(m, boundary_data(m, lambda, r_lambda), u, sign);
}

TypeISpace type_I_space(const OperatorModel& m, const BoundaryData& bd) {
  TypeISpace out;
  const CMatrix j = model_J_full(m).matrix();
  const CMatrix& u = bd.plus.upsilon_bases.back();
  const auto n = u.rows();
  if (u.cols() == 0) {
    out.basis = CMatrix(n, 0);
    return out;
  }
  std::vector<CMatrix> blocks;
  double scale = 0.0;
  for (double s : probes(m, bd)) {
    CMatrix im = im_T_boundary(m, bd.lambda, s);
    CMatrix sq = hermitian_sqrt(HermitianMatrix((im + im.adjoint()) / 2.0, 1e300), 1e-8).matrix();
    scale = std::max(scale, norm2(sq) * norm2(j));
    blocks.push_back(sq * j * u);
  }
  CMatrix stacked(blocks.size() * n, u.cols());
  for (std::size_t i = 0; i < blocks.size(); ++i) stacked.middleRows(i * n, n) = blocks[i];
  CMatrix coeff;
  if (scale <= 1e-300 || max_abs(stacked) <= 1e-12 * std::max(scale, 1.0)) {
    coeff = CMatrix::Identity(u.cols(), u.cols());
  } else {
    Eigen::JacobiSVD<CMatrix> svd(stacked, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > 1e-6 * scale) ++rank;
    coeff = svd.matrixV().rightCols(u.cols() - rank);
  }
  out.basis = orthonormalize(u * coeff);
  // nilA+^j u = nilA-^j u on the type-I space
  const int d = std::max(bd.plus.order_d, bd.minus.order_d);
  double norm_scale = std::max({1.0, norm2(bd.plus.P), norm2(bd.minus.P)});
  for (Eigen::Index c = 0; c < out.basis.cols(); ++c) {
    CVector w = out.basis.col(c);
    CVector wp = bd.plus.P * w, wm = bd.minus.P * w;
    for (int jj = 0; jj < d; ++jj) {
      out.chain_equality_residual = std::max(out.chain_equality_residual, (wp - wm).norm() / norm_scale);
      wp = bd.plus.nilA * wp;
      wm = bd.minus.nilA * wm;
    }
  }
  auto in_span = [&](const CVector& v) {
    if (out.basis.cols() == 0) return v.norm() <= 1e-9;
    CVector resid = v - out.basis * (out.basis.adjoint() * v);
    return resid.norm() <= 1e-6 * std::max(1.0, v.norm());
  };
  const CMatrix& u1 = bd.plus.upsilon_bases.front();
  for (Eigen::Index c = 0; c < u1.cols(); ++c)
    if (!in_span(u1.col(c))) out.contains_order1 = false;
  for (Eigen::Index c = 0; c < out.basis.cols(); ++c)
    if (!in_span(bd.plus.nilA * out.basis.col(c))) out.nilA_invariant = false;
  return out;
}

TypeISpace type_I_space(const OperatorModel& m, double lambda, double r_lambda) {
  return type_I_space(m, boundary_data(m, lambda, r_lambda));
}

namespace {

CMatrix leading_left(const CMatrix& a, Eigen::Index r) {
  if (r <= 0) return CMatrix(a.rows(), 0);
  return Eigen::JacobiSVD<CMatrix>(a, Eigen::ComputeFullU).matrixU().leftCols(r);
}

CMatrix leading_right_null(const CMatrix& a, Eigen::Index dim) {
  if (dim <= 0) return CMatrix(a.cols(), 0);
  return Eigen::JacobiSVD<CMatrix>(a, Eigen::ComputeFullV).matrixV().rightCols(dim);
}

// Jordan chains of a nilpotent K, with dim ker K^j supplied (kdims[j-1]).
std::vector<std::vector<CVector>> jordan_chains(const CMatrix& k, const std::vector<Eigen::Index>& kdims) {
  const auto n = k.rows();
  std::vector<std::vector<CVector>> chains;
  if (n == 0) return chains;
  std::vector<CMatrix> kernels{CMatrix(n, 0)};
  CMatrix kp = CMatrix::Identity(n, n);
  for (std::size_t j = 0; j < kdims.size(); ++j) {
    kp = kp * k;
    kernels.push_back(leading_right_null(kp, kdims[j]));
  }
  const int d = static_cast<int>(kernels.size()) - 1;
  std::vector<std::pair<int, CVector>> tops;
  for (int lvl = d; lvl >= 1; --lvl) {
    CMatrix span(n, 0);
    auto append = [&](const CMatrix& x) {
      CMatrix t(n, span.cols() + x.cols());
      t << span, x;
      span = t;
    };
    append(kernels[lvl - 1]);
    for (const auto& [tl, v] : tops) {
      CVector w = v;
      for (int i = 0; i < tl - lvl; ++i) w = k * w;
      append(w);
    }
    Eigen::Index want = kernels[lvl].cols() - span.cols();
    if (want <= 0) continue;
    CMatrix q = span.cols() ? leading_left(span, span.cols()) : CMatrix(n, 0);
    CMatrix proj = kernels[lvl] - q * (q.adjoint() * kernels[lvl]);
    CMatrix fresh = leading_left(proj, want);
    for (Eigen::Index c = 0; c < fresh.cols(); ++c) tops.push_back({lvl, fresh.col(c)});
  }
  for (const auto& [lvl, v] : tops) {
    std::vector<CVector> chain(lvl);
    CVector w = v;
    for (int i = lvl; i >= 1; --i) {
      chain[i - 1] = w;
      w = k * w;
    }
    chains.push_back(chain);
  }
  return chains;
}

double gram_residual(const CMatrix& basis, const CMatrix& j) {
  if (basis.cols() == 0) return 0.0;
  return max_abs(basis.adjoint() * j * basis);
}

}  // namespace

DepthReport depth_and_L(const OperatorModel& m, const BoundaryData& bd) {
  DepthReport out;
  const auto& rec = bd.plus;
  out.N = rec.alg_mult_N;
  out.geom_mult = rec.geom_mult_m;
  const CMatrix j = model_J_full(m).matrix();
  const auto n = rec.P.rows();
  CMatrix u = rec.upsilon_bases.empty() ? CMatrix(n, 0) : rec.upsilon_bases.back();
  CMatrix k = u.adjoint() * rec.nilA * u;
  std::vector<Eigen::Index> kdims;
  for (const auto& b : rec.upsilon_bases) kdims.push_back(b.cols());
  auto chains = jordan_chains(k, kdims);
  // range(K^t) has dimension N - dim ker K^t; the leading left singular vectors span it
  std::vector<CMatrix> ranges;
  CMatrix kp = CMatrix::Identity(k.rows(), k.cols());
  for (std::size_t t = 0; t < kdims.size(); ++t) {
    kp = kp * k;
    ranges.push_back(leading_left(kp, k.rows() - kdims[t]));
  }
  std::vector<CVector> all, wvecs, lvecs;
  for (std::size_t c = 0; c < chains.size(); ++c) {
    for (std::size_t i = 0; i < chains[c].size(); ++i) {
      const CVector& v = chains[c][i];
      int depth = 0;
      for (std::size_t t = 0; t < ranges.size(); ++t) {
        const CMatrix& r = ranges[t];
        CVector resid = r.cols() ? CVector(v - r * (r.adjoint() * v)) : v;
        if (resid.norm() <= 1e-7 * v.norm()) depth = static_cast<int>(t) + 1;
        else break;
      }
      int order = static_cast<int>(i) + 1;
      out.table.push_back({static_cast<int>(c), order, depth});
      CVector full = u * v;
      all.push_back(full);
      if (depth >= order) wvecs.push_back(full);
      bool l_prop = (order + depth) % 2 == 0 ? order <= depth : order <= depth + 1;
      if (l_prop) lvecs.push_back(full);
    }
  }
  auto to_matrix = [&](const std::vector<CVector>& v) {
    CMatrix x(n, static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) x.col(static_cast<Eigen::Index>(i)) = v[i];
    return x;
  };
  out.jordan_basis = to_matrix(all);
  out.clLw_basis = orthonormalize(to_matrix(wvecs));
  out.L_basis = orthonormalize(to_matrix(lvecs));
  double jn = std::max(1.0, norm2(j));
  out.orthogonality_residual = gram_residual(out.clLw_basis, j) / jn;
  out.L_orthogonality_residual = gram_residual(out.L_basis, j) / jn;
  return out;
}

DepthReport depth_and_L(const OperatorModel& m, double lambda, double r_lambda) {
  return depth_and_L(m, boundary_data(m, lambda, r_lambda));
}

BoundaryClassification classify_point(const OperatorModel& m, const BoundaryData& bd) {
  BoundaryClassification out;
  const CMatrix j = model_J_full(m).matrix();
  const CMatrix& pp = bd.plus.P;
  const CMatrix& pm = bd.minus.P;
  const CMatrix& qp = bd.plus.Q;
  const CMatrix& qm = bd.minus.Q;
  out.N = bd.plus.alg_mult_N;
  out.geom_mult = bd.plus.geom_mult_m;
  out.outside_essential = !has_essential_spectrum_at(m, bd.lambda);
  const double pscale = std::max({1.0, norm2(pp), norm2(pm)});
  const double jn = std::max(norm2(j), 1e-300);

  // type I: sqrt(Im T) J P+ = 0 at two probes
  double measure = 0.0, nosqrt = 0.0, djpd = 0.0;
  for (double s : probes(m, bd)) {
    CMatrix im = im_T_boundary(m, bd.lambda, s);
    HermitianMatrix imh((im + im.adjoint()) / 2.0, 1e300);
    CMatrix sq = hermitian_sqrt(imh, 1e-8).matrix();
    double sn = norm2(sq);
    if (sn > 1e-14 * std::max(1.0, norm2(model_T(m, SpectralPoint::plus(bd.lambda), s)))) {
      measure = std::max(measure, norm2(sq * j * pp) / (sn * jn * norm2(pp)));
      nosqrt = std::max(nosqrt, norm2(imh.matrix() * j * pp) / (sn * sn * jn * norm2(pp)));
      for (const CMatrix* p : {&pp, &pm})
        djpd = std::max(djpd, norm2(sq * j * (*p) * sq) / (sn * sn * jn * norm2(*p)));
    }
  }
  out.type_I_measure = measure;
  out.delta_jp_delta = djpd;
  out.type_I_point = measure < 1e-6 ? TypeI::yes : (measure > 1e-4 ? TypeI::no : TypeI::indeterminate);
  if ((nosqrt < 1e-6) != (measure < 1e-6))
    out.diagnostics.push_back("Im T J P and sqrt(Im T) J P disagree on type I");

  out.property_S = rel(pp * pm - pp, pscale * pscale) < 1e-7 && rel(pm * pp - pm, pscale * pscale) < 1e-7;
  out.property_P = rel(pp - pm, pscale) < 1e-7;
  if (out.property_S) {
    double scale = pscale * pscale * jn;
    double items[] = {
        rel(qp * qm - qm, pscale * pscale),   rel(qm * qp - qp, pscale * pscale),
        rel(qm * j * pp - j * pp, scale),     rel(qp * j * pm - j * pm, scale),
        rel(qm * j * pp - qm * j, scale),     rel(qp * j * pm - qp * j, scale),
        rel(qm * j * pp - qp * j * pm, scale),
    };
    out.S_consequence_residual = *std::max_element(std::begin(items), std::end(items));
    if (out.S_consequence_residual > 1e-7)
      out.diagnostics.push_back("property S holds but its Q/J identities miss by " + std::to_string(out.S_consequence_residual));
  }

  // spectrum of P+P- in {0, 1} with multiplicity N at 1
  CMatrix prod = pp * pm;
  auto clusters = cluster_spectrum(prod, eigenvalues(prod));
  out.pp_spectrum_ok = true;
  int ones = 0;
  for (const auto& c : clusters) {
    out.pp_eigenvalues.push_back(c.center);
    bool zero = std::abs(c.center) < 1e-6, one = std::abs(c.center - 1.0) < 1e-6;
    if (!zero && !one) out.pp_spectrum_ok = false;
    if (one) ones += c.size();
  }
  if (ones != out.N) out.pp_spectrum_ok = false;

  // property M: P+ maps Upsilon- onto Upsilon+ (and back) with full rank N
  const CMatrix& up = bd.plus.upsilon_bases.back();
  const CMatrix& um = bd.minus.upsilon_bases.back();
  auto full_rank = [&](const CMatrix& p, const CMatrix& basis) {
    if (basis.cols() != out.N) return false;
    Eigen::JacobiSVD<CMatrix> svd(p * basis);
    const auto& sv = svd.singularValues();
    return sv.size() > 0 && sv(sv.size() - 1) > 1e-8 * std::max(sv(0), 1e-300);
  };
  out.property_M = full_rank(pp, um) && full_rank(pm, up);

  // Upsilon+ cap Upsilon-, reported for the open comparison with the type-I space
  if (up.cols() && um.cols()) {
    CMatrix both(up.rows(), up.cols() + um.cols());
    both << up, -um;
    out.dim_upsilon_intersection = static_cast<int>(kernel_basis(both, 1e-7).cols());
  }

  auto ti = type_I_space(m, bd);
  out.dim_type_I_space = static_cast<int>(ti.basis.cols());
  if (ti.chain_equality_residual > 1e-6)
    out.diagnostics.push_back("type-I space breaks nilA+^j u = nilA-^j u by " + std::to_string(ti.chain_equality_residual));
  if (!ti.contains_order1) out.diagnostics.push_back("type-I space misses an order-1 vector");
  if (!ti.nilA_invariant) out.diagnostics.push_back("type-I space is not nilA-invariant");

  auto dl = depth_and_L(m, bd);
  out.depth_table = dl.table;
  out.clLw_dim = static_cast<int>(dl.clLw_basis.cols());
  out.L_dim = static_cast<int>(dl.L_basis.cols());
  if (dl.orthogonality_residual > 1e-7)
    out.diagnostics.push_back("<u, J v> on clLw is " + std::to_string(dl.orthogonality_residual));

  if (out.type_I_point == TypeI::yes && !out.property_P) out.diagnostics.push_back("type I but P+ != P-");
  if (out.property_P && !out.property_S) out.diagnostics.push_back("property P without property S");
  return out;
}

BoundaryClassification classify_point(const OperatorModel& m, double lambda, double r_lambda) {
  return classify_point(m, boundary_data(m, lambda, r_lambda));
}

}  // namespace resflow

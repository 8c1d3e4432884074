#include "resflow/models.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace resflow {

namespace {

constexpr double kSingularCond = 1e14;

CMatrix solve_checked(const CMatrix& m, const CMatrix& rhs, ErrorCode code, const char* what) {
  double cond = condition_number(m);
  if (!(cond < kSingularCond)) throw Error(code, std::string(what) + " (condition " + std::to_string(cond) + ")");
  return m.partialPivLu().solve(rhs);
}

cplx boundary_log(double lambda, double a, double b, Side side) {
  if (lambda == a || lambda == b) throw Error(ErrorCode::EndpointSingularity, "lambda equals an interval endpoint");
  if (lambda > a && lambda < b) {
    double re = std::log((b - lambda) / (lambda - a));
    return {re, side == Side::plus_i0 ? std::numbers::pi : -std::numbers::pi};
  }
  return {std::log(std::abs((b - lambda) / (a - lambda))), 0.0};
}

}  // namespace

SpectralPoint SpectralPoint::off_axis(double lambda, double y) {
  if (y == 0.0) throw Error(ErrorCode::InvalidArgument, "off-axis spectral point needs y != 0");
  return {lambda, y, Side::off_axis};
}

SpectralPoint SpectralPoint::conj() const {
  switch (side) {
    case Side::plus_i0: return minus(lambda);
    case Side::minus_i0: return plus(lambda);
    default: return {lambda, -y, Side::off_axis};
  }
}

int SpectralPoint::half_plane() const {
  if (side == Side::plus_i0) return 1;
  if (side == Side::minus_i0) return -1;
  return y > 0 ? 1 : -1;
}

FinitePencil FinitePencil::make(const HermitianMatrix& h0, const HermitianMatrix& v) {
  if (h0.size() != v.size()) throw Error(ErrorCode::InvalidArgument, "H0 and V dimensions differ");
  const auto n = h0.size();
  return {h0, CMatrix::Identity(n, n), v, v};
}

FinitePencil FinitePencil::make_rigged(const HermitianMatrix& h0, const CMatrix& f, const HermitianMatrix& j) {
  const auto n = h0.size();
  if (f.rows() != n || f.cols() != n || j.size() != n)
    throw Error(ErrorCode::InvalidArgument, "rigging dimensions do not match H0");
  require_finite(f, "F");
  if (!(condition_number(f) < 1e8)) throw Error(ErrorCode::InvalidArgument, "F is not numerically invertible");
  CMatrix v = f.adjoint() * j.matrix() * f;
  return {h0, f, j, HermitianMatrix((v + v.adjoint()) / 2.0)};
}

ContinuumModel ContinuumModel::make(std::vector<Interval> intervals, const HermitianMatrix& j) {
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const auto& iv = intervals[i];
    if (!(iv.a < iv.b)) throw Error(ErrorCode::InvalidArgument, "interval needs a < b");
    if (iv.c.size() != j.size()) throw Error(ErrorCode::InvalidArgument, "interval density has wrong dimension");
    auto e = eig_hermitian(iv.c);
    double scale = e.values.cwiseAbs().maxCoeff();
    if (e.values(0) < -1e-8 * scale) throw Error(ErrorCode::NotPSD, "interval density is not PSD");
    for (std::size_t k = 0; k < i; ++k)
      if (iv.a < intervals[k].b && intervals[k].a < iv.b)
        throw Error(ErrorCode::InvalidArgument, "intervals overlap");
  }
  return {std::move(intervals), j};
}

bool ContinuumModel::in_essential_interior(double lambda) const {
  for (const auto& iv : intervals)
    if (lambda > iv.a && lambda < iv.b) return true;
  return false;
}

HermitianMatrix EmbeddedModel::j_full() const {
  const auto m = base.dim();
  CMatrix j = CMatrix::Zero(m + 1, m + 1);
  j.topLeftCorner(m, m) = base.j.matrix();
  j.topRightCorner(m, 1) = psi_hat;
  j.bottomLeftCorner(1, m) = psi_hat.adjoint();
  j(m, m) = alpha;
  return HermitianMatrix(j);
}

const HermitianMatrix& model_J(const OperatorModel& m) {
  if (auto p = std::get_if<FinitePencil>(&m)) return p->j;
  if (auto c = std::get_if<ContinuumModel>(&m)) return c->j;
  return std::get<EmbeddedModel>(m).base.j;
}

HermitianMatrix model_J_full(const OperatorModel& m) {
  if (auto e = std::get_if<EmbeddedModel>(&m)) return e->j_full();
  return model_J(m);
}

Eigen::Index model_dim(const OperatorModel& m) {
  return std::visit([](const auto& x) { return x.dim(); }, m);
}

bool has_essential_spectrum_at(const OperatorModel& m, double lambda) {
  if (auto c = std::get_if<ContinuumModel>(&m)) return c->in_essential_interior(lambda);
  if (auto e = std::get_if<EmbeddedModel>(&m)) return e->base.in_essential_interior(lambda);
  return false;
}

const char* model_kind(const OperatorModel& m) {
  switch (m.index()) {
    case 0: return "finite";
    case 1: return "continuum";
    default: return "embedded";
  }
}

CMatrix finite_T(const FinitePencil& p, const SpectralPoint& z, cplx s) {
  const auto n = p.dim();
  CMatrix m = p.h(s) - z.z() * CMatrix::Identity(n, n);
  ErrorCode code = z.is_boundary() ? ErrorCode::SingularResolvent : ErrorCode::ResonantCoupling;
  CMatrix x = solve_checked(m, p.f.adjoint(), code, "H_s - z is singular");
  return p.f * x;
}

CMatrix continuum_base_T(const ContinuumModel& c, const SpectralPoint& z) {
  const auto m = c.dim();
  CMatrix t = CMatrix::Zero(m, m);
  for (const auto& iv : c.intervals) {
    cplx l;
    if (z.is_boundary()) {
      l = boundary_log(z.lambda, iv.a, iv.b, z.side);
    } else {
      cplx zz = z.z();
      l = std::log((iv.b - zz) / (iv.a - zz));
    }
    t += l * iv.c.matrix();
  }
  return t;
}

CMatrix continuum_T(const ContinuumModel& c, const SpectralPoint& z, cplx s, double s0) {
  CMatrix t0 = continuum_base_T(c, z);
  if (s == cplx(s0)) return t0;
  const auto m = c.dim();
  CMatrix factor = CMatrix::Identity(m, m) + (s - s0) * t0 * c.j.matrix();
  return solve_checked(factor, t0, ErrorCode::ResonantCoupling, "coupling factor is singular");
}

namespace {

struct EmbeddedParts {
  CMatrix that;
  CVector u;
  Eigen::RowVectorXcd row;
  cplx denom;
  double denom_scale;
};

EmbeddedParts embedded_parts(const EmbeddedModel& e, const SpectralPoint& z, cplx s) {
  EmbeddedParts p;
  p.that = continuum_T(e.base, z, s, e.r_lambda);
  p.u = p.that * e.psi_hat;
  p.row = e.psi_hat.adjoint() * p.that;
  cplx ds = s - e.r_lambda;
  cplx lz = z.is_boundary() ? cplx(0.0) : cplx(e.lambda) - z.z();
  cplx quad = (e.psi_hat.adjoint() * p.u)(0);
  p.denom = lz + ds * e.alpha - ds * ds * quad;
  p.denom_scale = std::abs(lz) + std::abs(ds * e.alpha) + std::abs(ds * ds * quad);
  return p;
}

}  // namespace

CMatrix embedded_T(const EmbeddedModel& e, const SpectralPoint& z, cplx s) {
  auto p = embedded_parts(e, z, s);
  if (p.denom == 0.0 || std::abs(p.denom) < p.denom_scale / kSingularCond)
    throw Error(ErrorCode::ResonantCoupling, "embedded block denominator vanishes");
  const auto m = e.base.dim();
  cplx d = 1.0 / p.denom;
  cplx ds = s - e.r_lambda;
  CMatrix t(m + 1, m + 1);
  t.topLeftCorner(m, m) = p.that + ds * ds * d * p.u * p.row;
  t.topRightCorner(m, 1) = -ds * d * p.u;
  t.bottomLeftCorner(1, m) = -ds * d * p.row;
  t(m, m) = d;
  return t;
}

CMatrix model_T(const OperatorModel& m, const SpectralPoint& z, cplx s) {
  if (auto p = std::get_if<FinitePencil>(&m)) return finite_T(*p, z, s);
  if (auto c = std::get_if<ContinuumModel>(&m)) return continuum_T(*c, z, s, 0.0);
  return embedded_T(std::get<EmbeddedModel>(m), z, s);
}

OpPair op_A(const OperatorModel& m, const SpectralPoint& z, cplx s) {
  CMatrix t = model_T(m, z, s);
  HermitianMatrix j = model_J_full(m);
  return {t * j.matrix(), j.matrix() * t};
}

CMatrix op_A_only(const OperatorModel& m, const SpectralPoint& z, cplx s) {
  return model_T(m, z, s) * model_J_full(m).matrix();
}

CMatrix im_T(const OperatorModel& m, const SpectralPoint& z, cplx s) {
  CMatrix t = model_T(m, z, s);
  CMatrix tc = model_T(m, z.conj(), s);
  return (t - tc) / cplx(0.0, 2.0);
}

double coupling_condition(const OperatorModel& m, const SpectralPoint& z, cplx s) {
  if (auto p = std::get_if<FinitePencil>(&m)) {
    const auto n = p->dim();
    return condition_number(p->h(s) - z.z() * CMatrix::Identity(n, n));
  }
  auto factor_cond = [&](const ContinuumModel& c, double s0) {
    CMatrix t0 = continuum_base_T(c, z);
    const auto k = c.dim();
    return condition_number(CMatrix::Identity(k, k) + (s - s0) * t0 * c.j.matrix());
  };
  if (auto c = std::get_if<ContinuumModel>(&m)) return factor_cond(*c, 0.0);
  const auto& e = std::get<EmbeddedModel>(m);
  double cond = factor_cond(e.base, e.r_lambda);
  if (!(cond < kSingularCond)) return cond;
  auto p = embedded_parts(e, z, s);
  if (p.denom == 0.0) return std::numeric_limits<double>::infinity();
  return std::max(cond, p.denom_scale / std::abs(p.denom));
}

double choose_probe(const OperatorModel& m, const SpectralPoint& z, double cond_cap, double offset) {
  for (double s : kProbeList) {
    double cond = coupling_condition(m, z, s + offset);
    if (cond < cond_cap) return s + offset;
  }
  for (int k = 1; k < 64; ++k) {
    double s = offset + 0.137 * k * (k % 2 ? 1.0 : -1.0);
    if (coupling_condition(m, z, s) < cond_cap) return s;
  }
  throw Error(ErrorCode::ResonantCoupling, "no non-resonant probe coupling found");
}

EmbeddedModel embed_eigenvalue(const ContinuumModel& base, const CVector& psi_hat, double alpha, double lambda,
                               double r_lambda) {
  if (psi_hat.size() != base.dim()) throw Error(ErrorCode::InvalidArgument, "psi_hat has wrong length");
  if (!base.in_essential_interior(lambda)) {
    for (const auto& iv : base.intervals)
      if (lambda == iv.a || lambda == iv.b) throw Error(ErrorCode::EndpointSingularity, "lambda is an endpoint");
    throw Error(ErrorCode::InvalidArgument, "lambda must lie inside a base interval");
  }
  EmbeddedModel e{base, psi_hat, alpha, lambda, r_lambda};
  auto zp = SpectralPoint::plus(lambda);
  if (alpha == 0.0) {
    bool regular = false;
    double pn = psi_hat.squaredNorm();
    for (double s : kProbeList) {
      CMatrix that;
      try {
        that = continuum_T(base, zp, s, r_lambda);
      } catch (const Error&) {
        continue;
      }
      cplx q = (psi_hat.adjoint() * that * psi_hat)(0);
      if (std::abs(q) > 1e-12 * std::max(pn * that.norm(), 1e-300)) {
        regular = true;
        break;
      }
    }
    if (!regular) throw Error(ErrorCode::NotRegularizing, "alpha = 0 and <psi, u(s)> vanishes at all probes");
  }
  return e;
}

}  // namespace resflow

#include "resflow/embedded.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "resflow/index_flow.hpp"

namespace resflow {

namespace {

struct BaseAtPoint {
  CMatrix t0;  // T_hat at (lambda +- i0, r_lambda)
  CMatrix a_hat;
  CVector u;
  std::vector<cplx> a;
};

BaseAtPoint base_at(const EmbeddedModel& e, Side side, int count) {
  BaseAtPoint b;
  SpectralPoint z{e.lambda, 0.0, side};
  b.t0 = continuum_base_T(e.base, z);
  b.a_hat = b.t0 * e.base.j.matrix();
  b.u = b.t0 * e.psi_hat;
  CVector w = b.u;
  for (int j = 0; j < count; ++j) {
    b.a.push_back(e.psi_hat.dot(w));
    w = b.a_hat * w;
  }
  return b;
}

bool coefficient_zero(const BaseAtPoint& b, const CVector& psi, int j) {
  double scale = psi.squaredNorm() * std::max(norm2(b.t0), 1e-300) * std::pow(std::max(1.0, norm2(b.a_hat)), j);
  return std::abs(b.a[j]) <= 1e-10 * scale;
}

int predicted_order(const EmbeddedModel& e, const BaseAtPoint& b) {
  if (e.alpha != 0.0) return 1;
  for (std::size_t j = 0; j < b.a.size(); ++j)
    if (!coefficient_zero(b, e.psi_hat, static_cast<int>(j))) return static_cast<int>(j) + 2;
  return 0;
}

using Series = std::vector<cplx>;

Series invert_series(const Series& e, int n) {
  Series f(n, 0.0);
  f[0] = 1.0 / e[0];
  for (int k = 1; k < n; ++k) {
    cplx acc = 0.0;
    for (int i = 1; i <= k && i < static_cast<int>(e.size()); ++i) acc += e[i] * f[k - i];
    f[k] = -acc / e[0];
  }
  return f;
}

// Residues of (s - r)^j T(s) J at r from the Laurent data of the block formula.
std::pair<CMatrix, CMatrix> residues(const EmbeddedModel& e, Side side, int v) {
  const int terms = v + 3;
  auto b = base_at(e, side, v + terms + 2);
  const auto m = e.base.dim();
  std::vector<CMatrix> that(terms);
  std::vector<CVector> u(terms);
  std::vector<Eigen::RowVectorXcd> row(terms);
  CMatrix pw = CMatrix::Identity(m, m);
  for (int k = 0; k < terms; ++k) {
    that[k] = (k % 2 ? -1.0 : 1.0) * pw * b.t0;
    u[k] = that[k] * e.psi_hat;
    row[k] = e.psi_hat.adjoint() * that[k];
    pw = pw * b.a_hat;
  }
  // denominator (s-r) alpha - (s-r)^2 <psi, u(s)>, divided by (s-r)^v
  Series den(v + terms + 2, 0.0);
  den[1] = e.alpha;
  for (int k = 0; k + 2 < static_cast<int>(den.size()); ++k) den[k + 2] = -(k % 2 ? -1.0 : 1.0) * b.a[k];
  Series lead(den.begin() + v, den.end());
  Series f = invert_series(lead, terms);
  auto dcoef = [&](int p) -> cplx {
    int idx = p + v;
    return idx >= 0 && idx < terms ? f[idx] : cplx(0.0);
  };
  auto block_at = [&](int p) {
    CMatrix t = CMatrix::Zero(m + 1, m + 1);
    for (int a = -v; a <= p - 2; ++a)
      for (int bb = 0; bb <= p - 2 - a; ++bb) {
        int c = p - 2 - a - bb;
        if (bb < terms && c < terms) t.topLeftCorner(m, m) += dcoef(a) * u[bb] * row[c];
      }
    for (int a = -v; a <= p - 1; ++a) {
      int bb = p - 1 - a;
      if (bb < terms) {
        t.topRightCorner(m, 1) -= dcoef(a) * u[bb];
        t.bottomLeftCorner(1, m) -= dcoef(a) * row[bb];
      }
    }
    t(m, m) = dcoef(p);
    return t;
  };
  const CMatrix j = e.j_full().matrix();
  return {block_at(-1) * j, block_at(-2) * j};
}

}  // namespace

EmbeddedDiagnostics embedded_diagnostics(const EmbeddedModel& e, int j_max) {
  const int search = static_cast<int>(e.base.dim()) + 2;
  auto bp = base_at(e, Side::plus_i0, search + 1);
  EmbeddedDiagnostics out;
  out.order_predicted = predicted_order(e, bp);
  out.regularizing = out.order_predicted > 0;
  if (!out.regularizing) throw Error(ErrorCode::NotRegularizing, "alpha = 0 and every a_j vanishes");
  if (j_max < 0) j_max = out.order_predicted + 2;
  bp = base_at(e, Side::plus_i0, j_max + 1);
  auto bm = base_at(e, Side::minus_i0, j_max + 1);
  out.u_hat_plus = bp.u;
  out.u_hat_minus = bm.u;
  out.a_plus = bp.a;
  out.a_minus = bm.a;
  out.D_function = [e](const SpectralPoint& z, cplx s) {
    CMatrix that = continuum_T(e.base, z, s, e.r_lambda);
    cplx ds = s - e.r_lambda;
    cplx lz = z.is_boundary() ? cplx(0.0) : cplx(e.lambda) - z.z();
    cplx q = e.psi_hat.dot(that * e.psi_hat);
    return 1.0 / (lz + ds * e.alpha - ds * ds * q);
  };
  return out;
}

ClosedFormIdempotents closed_form_idempotents(const EmbeddedModel& e, int d) {
  if (d < 1 || d > 3) throw Error(ErrorCode::InvalidArgument, "closed forms are available for d = 1, 2, 3");
  auto diag = embedded_diagnostics(e);
  if (diag.order_predicted != d)
    throw Error(ErrorCode::OrderMismatch, "predicted order " + std::to_string(diag.order_predicted) +
                                              " differs from requested " + std::to_string(d));
  auto [pp, np] = residues(e, Side::plus_i0, d);
  auto [pm, nm] = residues(e, Side::minus_i0, d);
  return {pp, pm, np, nm};
}

RankOneAnalysis rank_one_index_analysis(const EmbeddedModel& e) {
  if (max_abs(e.base.j.matrix()) != 0.0) throw Error(ErrorCode::InvalidArgument, "rank-one analysis needs J_hat = 0");
  RankOneAnalysis out;
  const auto m = e.base.dim();
  CMatrix x = CMatrix::Zero(m + 1, 2);
  x.block(0, 0, m, 1) = e.psi_hat;
  x(m, 1) = 1.0;
  CMatrix g(2, 2);
  g << 0.0, 1.0, 1.0, e.alpha;

  out.s = e.r_lambda + 1.0;
  for (double off : {1.0, 0.7, -1.0, 0.45}) {
    double s = e.r_lambda + off;
    if (coupling_condition(e, SpectralPoint::plus(e.lambda), s) < 1e8) {
      out.s = s;
      break;
    }
  }
  const double scale = std::max(1.0, std::abs(e.r_lambda));
  for (double y : {1e-2, 1e-3, 1e-4}) {
    CMatrix t = embedded_T(e, SpectralPoint::off_axis(e.lambda, y), out.s);
    CMatrix mm = g * x.adjoint() * t * x;
    cplx tr = mm.trace(), det = mm.determinant();
    cplx disc = std::sqrt(tr * tr - 4.0 * det);
    RankOneSample smp{y, (tr + disc) / 2.0, (tr - disc) / 2.0, {}, {}};
    auto to_r = [&](cplx sg) {
      return std::abs(sg) > 1e-300 ? out.s - 1.0 / sg : cplx(std::numeric_limits<double>::infinity());
    };
    smp.r1 = to_r(smp.sigma1);
    smp.r2 = to_r(smp.sigma2);
    out.samples.push_back(smp);
  }
  const auto& last = out.samples.back();
  std::vector<cplx> group;
  for (cplx r : {last.r1, last.r2})
    if (std::abs(r - e.r_lambda) < 0.05 * scale) group.push_back(r);
  for (cplx r : group) {
    if (r.imag() > 0) ++out.n_plus;
    else if (r.imag() < 0) ++out.n_minus;
  }
  out.index = out.n_plus - out.n_minus;
  if (e.alpha != 0.0 && group.size() == 1) {
    out.slope = (group[0] - e.r_lambda) / last.y;
    cplx expect(0.0, 1.0 / e.alpha);
    out.slope_ok = std::abs(out.slope - expect) <= 0.05 * std::abs(expect);
  }
  if (e.alpha == 0.0) out.opposite_half_planes = out.n_plus == 1 && out.n_minus == 1;
  out.model_index = resonance_index(e, e.lambda, e.r_lambda).index();
  out.index_matches = out.model_index == out.index;
  return out;
}

FinitePencil construct_finite_example(double lambda, int d, std::uint64_t seed, ConstructOptions opt) {
  if (d < 1 || d > 5) throw Error(ErrorCode::InvalidArgument, "target order must be in 1..5");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto sgn = [&] { return unit(rng) < 0.5 ? -1.0 : 1.0; };
  const int nb = d + 1;

  for (int attempt = 0; attempt < 200; ++attempt) {
    std::vector<double> t(nb);
    for (int i = 0; i < nb; ++i) t[i] = sgn() * (0.5 + 1.5 * unit(rng));
    bool distinct = true;
    for (int i = 0; i < nb && distinct; ++i)
      for (int k = i + 1; k < nb; ++k)
        if (std::abs(t[i] - t[k]) < 0.1) distinct = false;
    if (!distinct) continue;

    Eigen::VectorXd w(nb);
    if (d >= 3) {
      Eigen::MatrixXd vand(d - 2, nb);
      for (int k = 0; k < d - 2; ++k)
        for (int i = 0; i < nb; ++i) vand(k, i) = std::pow(t[i], k);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(vand, Eigen::ComputeFullV);
      Eigen::MatrixXd null = svd.matrixV().rightCols(nb - (d - 2));
      Eigen::VectorXd coef(null.cols());
      for (Eigen::Index i = 0; i < coef.size(); ++i) coef(i) = unit(rng) * 2.0 - 1.0;
      w = null * coef;
    } else {
      for (int i = 0; i < nb; ++i) w(i) = sgn() * (0.3 + unit(rng));
    }
    w /= w.cwiseAbs().maxCoeff();
    if (w.cwiseAbs().minCoeff() < 5e-2) continue;
    if (d >= 2) {
      double lead = 0.0, mass = 0.0;
      for (int i = 0; i < nb; ++i) {
        lead += w(i) * std::pow(t[i], d - 2);
        mass += std::abs(w(i)) * std::pow(std::abs(t[i]), d - 2);
      }
      if (std::abs(lead) < 0.2 * mass) continue;
    }

    std::vector<double> hdiag(nb + 1, lambda);
    CMatrix v = CMatrix::Zero(nb + 1, nb + 1);
    for (int i = 0; i < nb; ++i) {
      double h = (w(i) < 0 ? -1.0 : 1.0) * (0.5 + 1.5 * unit(rng));
      hdiag[i] = lambda + h;
      v(i, i) = t[i] * h;
      double psi = sgn() * std::sqrt(std::abs(w(i)) * std::abs(h));
      v(i, nb) = psi;
      v(nb, i) = psi;
    }
    if (d == 1) v(nb, nb) = 1.0;
    CMatrix h0 = HermitianMatrix::diagonal(hdiag).matrix();
    if (opt.scramble) {
      std::normal_distribution<double> gauss;
      CMatrix gmat(nb + 1, nb + 1);
      for (Eigen::Index i = 0; i < gmat.size(); ++i) gmat(i) = cplx(gauss(rng), gauss(rng));
      Eigen::HouseholderQR<CMatrix> qr(gmat);
      CMatrix u = qr.householderQ();
      h0 = u * h0 * u.adjoint();
      v = u * v * u.adjoint();
    }
    return FinitePencil::make(HermitianMatrix((h0 + h0.adjoint()) / 2.0), HermitianMatrix((v + v.adjoint()) / 2.0));
  }
  throw Error(ErrorCode::ConstructionFailed, "could not satisfy the orthogonality system; try another seed");
}

EmbeddedModel embedded_continuum_example(int order, std::uint64_t seed, double r_lambda) {
  if (order < 1 || order > 4) throw Error(ErrorCode::InvalidArgument, "embedded examples cover orders 1..4");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto cu = [&] { return cplx(unit(rng), unit(rng)); };

  CMatrix c1 = CMatrix::Zero(3, 3), c2 = CMatrix::Zero(3, 3), c3 = CMatrix::Zero(3, 3);
  c1(0, 0) = 1.0 + 0.5 * (unit(rng) + 1.0);
  CVector p(3), q(3);
  p << 0.0, 1.0, 1.0;
  q << 0.0, 1.0, -1.0;
  c2 = p * p.adjoint() / 2.0;
  c3 = q * q.adjoint() / 2.0;
  auto base_j = [&](bool zero33) {
    CMatrix j(3, 3);
    for (int i = 0; i < 3; ++i) {
      j(i, i) = unit(rng);
      for (int k = i + 1; k < 3; ++k) {
        j(i, k) = cu();
        j(k, i) = std::conj(j(i, k));
      }
    }
    if (zero33) j(2, 2) = 0.0;
    else j(2, 2) = (j(2, 2).real() < 0 ? -1.0 : 1.0) * (0.4 + std::abs(j(2, 2).real()));
    if (std::abs(j(0, 2)) < 0.3) j(0, 2) = j(2, 0) = 0.5;
    return HermitianMatrix(j);
  };
  std::vector<Interval> ivs = {{-1.0, 1.0, HermitianMatrix(c1)}, {1.0, 2.0, HermitianMatrix(c2)},
                               {-2.0, -1.0, HermitianMatrix(c3)}};
  CVector psi(3);
  double alpha = 0.0;
  HermitianMatrix j;
  if (order <= 2) {
    for (int i = 0; i < 3; ++i) psi(i) = cu();
    if (std::abs(psi(0)) < 0.3) psi(0) = 0.5;
    j = base_j(false);
    if (order == 1) alpha = (unit(rng) < 0 ? -1.0 : 1.0) * (0.5 + 0.5 * std::abs(unit(rng)));
  } else {
    psi << 0.0, 0.6 + 0.4 * std::abs(unit(rng)), 0.0;
    j = base_j(order == 4);
  }
  return embed_eigenvalue(ContinuumModel::make(ivs, j), psi, alpha, 0.0, r_lambda);
}

EmbeddedModel scalar_embedded_example(double alpha, double r_lambda) {
  CMatrix one = CMatrix::Ones(1, 1);
  auto base = ContinuumModel::make({{-1.0, 1.0, HermitianMatrix(one)}}, HermitianMatrix::zero(1));
  return embed_eigenvalue(base, one.col(0), alpha, 0.0, r_lambda);
}

EmbeddedModel decoupled_embedded_example(double r_lambda) {
  CMatrix c1 = CMatrix::Zero(3, 3);
  c1(0, 0) = 1.0;
  CVector p(3), q(3), psi(3);
  p << 0.0, 1.0, 1.0;
  q << 0.0, 1.0, -1.0;
  psi << 1.0, cplx(0.4, 0.3), -0.5;
  std::vector<Interval> ivs = {{-1.0, 1.0, HermitianMatrix(c1)},
                               {1.0, 2.0, HermitianMatrix(CMatrix(p * p.adjoint() / 2.0))},
                               {-2.0, -1.0, HermitianMatrix(CMatrix(q * q.adjoint() / 2.0))}};
  return embed_eigenvalue(ContinuumModel::make(ivs, HermitianMatrix::zero(3)), psi, 0.0, 0.0, r_lambda);
}

}  // namespace resflow

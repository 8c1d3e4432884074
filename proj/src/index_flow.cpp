#include "resflow/index_flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace resflow {

int r_index(const CMatrix& a, double zero_tol, double real_tol) {
  auto eigs = eigenvalues(a);
  double scale = 0.0;
  for (auto e : eigs) scale = std::max(scale, std::abs(e));
  if (scale == 0.0) return 0;
  int n_plus = 0, n_minus = 0;
  for (auto e : eigs) {
    if (std::abs(e) <= zero_tol * scale) continue;
    if (std::abs(e.imag()) <= real_tol * scale)
      throw Error(ErrorCode::NotClassR, "nonzero eigenvalue is numerically real");
    (e.imag() > 0 ? n_plus : n_minus)++;
  }
  return n_plus - n_minus;
}

int r_index_top(const CMatrix& a, int count, double real_tol) {
  auto eigs = eigenvalues(a);
  std::sort(eigs.begin(), eigs.end(), [](cplx x, cplx y) { return std::abs(x) > std::abs(y); });
  if (eigs.empty()) return 0;
  double scale = std::abs(eigs.front());
  int idx = 0;
  for (int i = 0; i < count && i < static_cast<int>(eigs.size()); ++i) {
    if (std::abs(eigs[i].imag()) <= real_tol * scale)
      throw Error(ErrorCode::NotClassR, "nonzero eigenvalue is numerically real");
    idx += eigs[i].imag() > 0 ? 1 : -1;
  }
  return idx;
}

KreinCheck krein_sign_check(const FinitePencil& p, const SpectralPoint& z, double s) {
  if (z.is_boundary() || z.y <= 0) throw Error(ErrorCode::InvalidArgument, "Krein check needs Im z > 0");
  KreinCheck k;
  auto sig = signature(p.v, 1e-10);
  k.sign_v = sig.sign();
  CMatrix a = finite_T(p, z, s) * p.j.matrix();
  k.rindex = r_index_top(a, signature(p.j, 1e-10).rank());
  k.agree = k.rindex == k.sign_v;
  return k;
}

ResonanceMatrices resonance_matrix(const OperatorModel& m, const GroupSplitting& g, bool strict) {
  const CMatrix j = model_J_full(m).matrix();
  ResonanceMatrices out;
  out.m_minus_plus = g.Q_minus_i0 * j * g.P_plus_i0;
  out.m_plus_minus = g.Q_plus_i0 * j * g.P_minus_i0;
  auto herm_res = [](const CMatrix& x) { return max_abs(x - x.adjoint()) / std::max(1.0, max_abs(x)); };
  out.hermitian_residual = std::max(herm_res(out.m_minus_plus), herm_res(out.m_plus_minus));
  if (out.hermitian_residual > 1e-8 && strict)
    throw Error(ErrorCode::NumericalFailure,
                "resonance matrix is not Hermitian (residual " + std::to_string(out.hermitian_residual) + ")");
  auto sym = [](const CMatrix& x) { return HermitianMatrix((x + x.adjoint()) / 2.0, 1e300); };
  out.sig_minus_plus = signature(sym(out.m_minus_plus), 1e-8, g.N, strict);
  out.sig_plus_minus = signature(sym(out.m_plus_minus), 1e-8, g.N, strict);
  return out;
}

ResonanceMatrices resonance_matrix(const OperatorModel& m, double lambda, double r_lambda, bool strict) {
  return resonance_matrix(m, group_splitting(m, lambda, r_lambda), strict);
}

IndexReport resonance_index(const OperatorModel& m, double lambda, double r_lambda, bool strict) {
  IndexReport rep;
  rep.lambda = lambda;
  rep.r_lambda = r_lambda;
  rep.group = group_splitting(m, lambda, r_lambda);
  const auto& g = rep.group;
  rep.N_plus = g.N_plus;
  rep.N_minus = g.N_minus;
  rep.N = g.N;
  rep.order_d = g.plus_record.order_d;
  rep.dim_upsilon1 = g.plus_record.geom_mult_m;
  rep.ind_splitting = g.N_plus - g.N_minus;
  rep.diagnostics = g.diagnostics;
  for (const auto& d : g.plus_record.diagnostics) rep.diagnostics.push_back("lambda+i0: " + d);

  double s = r_lambda + 1.5 * g.ball_radius;
  auto zp = SpectralPoint::off_axis(lambda, g.y_used);
  CMatrix ap = op_A_only(m, zp, s) * g.P_group;
  rep.ind_rindex = r_index(ap, 1e-8, 1e-13);

  rep.matrices = resonance_matrix(m, g, strict);
  rep.ind_signature = rep.matrices.sig_minus_plus.sign();
  if (rep.matrices.sig_plus_minus.sign() != rep.ind_signature)
    rep.diagnostics.push_back("signatures of the two resonance matrices differ");
  if (rep.matrices.sig_minus_plus.ill_conditioned) rep.diagnostics.push_back("resonance matrix rank differs from N");

  rep.consistency = rep.ind_splitting == rep.ind_rindex && rep.ind_rindex == rep.ind_signature;
  rep.uturn_ok = std::abs(rep.ind_splitting) <= rep.dim_upsilon1;
  return rep;
}

namespace {

double polish_real_point(const OperatorModel& m, double lambda, double r0) {
  auto z = SpectralPoint::plus(lambda);
  double s = choose_probe(m, z, 1e8, r0 + 0.5);
  CMatrix a = op_A_only(m, z, s);
  const auto n = a.rows();
  auto f = [&](double r) {
    CMatrix mm = CMatrix::Identity(n, n) + (r - s) * a;
    return smallest_singular_value(mm) / std::max(1.0, norm2(mm));
  };
  double h = 1e-8 * std::max(1.0, std::abs(r0));
  double lo = r0 - h, hi = r0 + h;
  const double gr = 0.6180339887498949;
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 40; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = f(x2);
    }
  }
  double best = 0.5 * (lo + hi);
  double f0 = f(r0), fb = f(best);
  double r = fb < 0.5 * f0 ? best : r0;
  if (std::min(f0, fb) > 1e-7)
    throw Error(ErrorCode::NumericalFailure, "real resonance point candidate failed the singularity check");
  return r;
}

}  // namespace

std::vector<double> real_resonance_points(const OperatorModel& m, double lambda, double a, double b) {
  if (max_abs(model_J(m).matrix()) == 0.0) return {};
  auto z = SpectralPoint::plus(lambda);
  double mid = 0.5 * (a + b);
  double half = 0.5 * (b - a);
  auto pts = find_resonance_points(m, z, choose_probe(m, z, 1e8, mid), Disk{mid, half * 1.5 + 1e-9}, {});
  std::vector<double> out;
  for (const auto& p : pts) {
    double scale = std::max(1.0, std::abs(p.r));
    if (std::abs(p.r.imag()) > 1e-7 * scale) continue;
    double r = p.r.real();
    if (std::abs(r - a) <= 1e-9 * scale || std::abs(r - b) <= 1e-9 * scale)
      throw Error(ErrorCode::EndpointResonant, "interval endpoint is a resonance point");
    if (r <= a || r >= b) continue;
    out.push_back(polish_real_point(m, lambda, r));
  }
  std::sort(out.begin(), out.end());
  return out;
}

FlowReport total_resonance_index(const OperatorModel& m, double lambda, double a, double b, bool strict) {
  if (!(a < b)) throw Error(ErrorCode::InvalidArgument, "interval needs a < b");
  FlowReport rep;
  rep.lambda = lambda;
  rep.a = a;
  rep.b = b;
  for (double r : real_resonance_points(m, lambda, a, b)) {
    auto ir = resonance_index(m, lambda, r, strict);
    if (!ir.consistency) {
      rep.agreement = false;
      rep.diagnostics.push_back("index methods disagree at r = " + std::to_string(r));
    }
    rep.total += ir.index();
    rep.per_point.push_back(std::move(ir));
  }
  if (auto p = std::get_if<FinitePencil>(&m)) {
    rep.ssf_value = ssf_counting(*p, lambda, a, b);
    rep.tracking_value = spectral_flow_oracle(*p, lambda, a, b);
    if (*rep.ssf_value != rep.total || *rep.tracking_value != rep.total) rep.agreement = false;
  }
  return rep;
}

namespace {

int count_below(const FinitePencil& p, double lambda, double s) {
  HermitianMatrix h(p.h(s), 1e300);
  auto e = eig_hermitian(h);
  double scale = std::max(1.0, e.values.cwiseAbs().maxCoeff());
  int c = 0;
  for (Eigen::Index i = 0; i < e.values.size(); ++i) {
    if (std::abs(e.values(i) - lambda) <= 1e-10 * scale)
      throw Error(ErrorCode::EigenvalueAtLambda, "lambda is an eigenvalue at coupling " + std::to_string(s));
    if (e.values(i) <= lambda) ++c;
  }
  return c;
}

struct Node {
  double s;
  HermitianEig eig;
};

Node make_node(const FinitePencil& p, double s) { return {s, eig_hermitian(HermitianMatrix(p.h(s), 1e300))}; }

// Greedy curve matching by eigenvector overlap: perm[i] = index at the right node of curve i.
std::vector<int> match_curves(const Node& l, const Node& r) {
  const auto n = l.eig.values.size();
  Eigen::MatrixXd ov = (l.eig.vectors.adjoint() * r.eig.vectors).cwiseAbs();
  std::vector<int> perm(n, -1);
  std::vector<bool> used(n, false);
  for (Eigen::Index step = 0; step < n; ++step) {
    double best = -1;
    Eigen::Index bi = 0, bj = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (perm[i] >= 0) continue;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (used[j]) continue;
        double score = ov(i, j) - 1e-3 * std::abs(l.eig.values(i) - r.eig.values(j));
        if (score > best) {
          best = score;
          bi = i;
          bj = j;
        }
      }
    }
    perm[bi] = static_cast<int>(bj);
    used[bj] = true;
  }
  return perm;
}

int crossings(const Node& l, const Node& r, double lambda) {
  auto perm = match_curves(l, r);
  int sum = 0;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    double e0 = l.eig.values(static_cast<Eigen::Index>(i)) - lambda;
    double e1 = r.eig.values(perm[i]) - lambda;
    if (e0 <= 0 && e1 > 0) ++sum;
    else if (e0 > 0 && e1 <= 0) --sum;
  }
  return sum;
}

int below(const Node& n, double lambda) {
  int c = 0;
  for (Eigen::Index i = 0; i < n.eig.values.size(); ++i)
    if (n.eig.values(i) <= lambda) ++c;
  return c;
}

bool any_sign_change(const Node& l, const Node& r, double lambda) { return below(l, lambda) != below(r, lambda); }

int flow_segment(const FinitePencil& p, const Node& l, const Node& r, double lambda, int depth) {
  bool change = any_sign_change(l, r, lambda);
  int detected = crossings(l, r, lambda);
  int expected = below(l, lambda) - below(r, lambda);
  if (!change && detected == 0) return 0;
  if (r.s - l.s <= 1e-9 || depth > 60) {
    if (detected != expected)
      throw Error(ErrorCode::GridTooCoarse, "crossing count does not match the eigenvalue count change");
    return detected;
  }
  Node mid = make_node(p, 0.5 * (l.s + r.s));
  return flow_segment(p, l, mid, lambda, depth + 1) + flow_segment(p, mid, r, lambda, depth + 1);
}

}  // namespace

int ssf_counting(const FinitePencil& p, double lambda, double a, double b) {
  return count_below(p, lambda, a) - count_below(p, lambda, b);
}

int spectral_flow_oracle(const FinitePencil& p, double lambda, double a, double b, int grid) {
  if (grid < 1) throw Error(ErrorCode::InvalidArgument, "grid must be positive");
  count_below(p, lambda, a);
  count_below(p, lambda, b);
  if (a == b) return 0;
  int total = 0;
  Node left = make_node(p, a);
  for (int k = 1; k <= grid; ++k) {
    Node right = make_node(p, a + (b - a) * k / grid);
    total += flow_segment(p, left, right, lambda, 0);
    left = std::move(right);
  }
  return total;
}

}  // namespace resflow

#include "resflow/resonance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace resflow {

namespace {

constexpr double kDropZero = 1e-7;
constexpr double kProbeMatch = 1e-7;

std::vector<ResonancePoint> points_from_probe(const OperatorModel& m, const SpectralPoint& z, cplx s,
                                              double cluster_tol) {
  CMatrix a = op_A_only(m, z, s);
  double scale = norm2(a);
  std::vector<ResonancePoint> out;
  if (scale == 0.0) return out;
  auto clusters = cluster_spectrum(a, eigenvalues(a), cluster_tol);
  for (const auto& c : clusters) {
    if (std::abs(c.center) <= kDropZero * scale) continue;
    out.push_back({s - 1.0 / c.center, c.size()});
  }
  return out;
}

double match_tol(cplx r) { return kProbeMatch * std::max(1.0, std::abs(r)); }

void check_against(const std::vector<ResonancePoint>& a, const std::vector<ResonancePoint>& b,
                   std::optional<Disk> region) {
  for (const auto& p : a) {
    if (region && !region->contains(p.r)) continue;
    double best = std::numeric_limits<double>::infinity();
    int mult = 0;
    for (const auto& q : b) {
      double d = std::abs(p.r - q.r);
      if (d < best) {
        best = d;
        mult = q.alg_mult;
      }
    }
    if (!(best <= match_tol(p.r)) || mult != p.alg_mult)
      throw Error(ErrorCode::InconsistentProbes, "resonance point " + std::to_string(p.r.real()) + "+" +
                                                     std::to_string(p.r.imag()) + "i not reproduced (gap " +
                                                     std::to_string(best) + ")");
  }
}

cplx second_probe(const OperatorModel& m, const SpectralPoint& z, cplx s) {
  static constexpr double shifts[] = {0.2718281828, -0.3535533906, 0.6180339887, -0.7071067812, 1.1};
  for (double d : shifts) {
    cplx s2 = s + d * std::max(1.0, std::abs(s));
    if (coupling_condition(m, z, s2) < 1e8) return s2;
  }
  throw Error(ErrorCode::ResonantCoupling, "no second probe available");
}

}  // namespace

std::vector<ResonancePoint> find_resonance_points(const OperatorModel& m, const SpectralPoint& z, cplx s,
                                                  std::optional<Disk> region, const FindOptions& opt) {
  if (!(coupling_condition(m, z, s) < 1e12))
    throw Error(ErrorCode::ResonantCoupling, "probe coupling is resonant");
  auto pts = points_from_probe(m, z, s, opt.cluster_tol);
  if (opt.check_probes) {
    cplx s2 = second_probe(m, z, s);
    auto pts2 = points_from_probe(m, z, s2, opt.cluster_tol);
    check_against(pts, pts2, region);
    check_against(pts2, pts, region);
  }
  if (region) std::erase_if(pts, [&](const ResonancePoint& p) { return !region->contains(p.r); });
  std::sort(pts.begin(), pts.end(), [](const ResonancePoint& x, const ResonancePoint& y) {
    if (x.r.real() != y.r.real()) return x.r.real() < y.r.real();
    return x.r.imag() < y.r.imag();
  });
  return pts;
}

std::vector<ResonancePoint> find_resonance_points(const OperatorModel& m, const SpectralPoint& z,
                                                  std::optional<Disk> region, const FindOptions& opt) {
  double offset = region ? region->center.real() + region->radius : 0.0;
  return find_resonance_points(m, z, choose_probe(m, z, 1e8, offset), region, opt);
}

double isolation_radius(const OperatorModel& m, const SpectralPoint& z, cplx r, const FindOptions& opt) {
  double cap = 0.5 * std::max(1.0, std::abs(r));
  cplx s = choose_probe(m, z, 1e8, r.real() + 0.5 * cap);
  auto pts = find_resonance_points(m, z, s, std::nullopt, opt);
  double same = 1e-6 * std::max(1.0, std::abs(r));
  double d = std::numeric_limits<double>::infinity();
  bool found = false;
  for (const auto& p : pts) {
    double dist = std::abs(p.r - r);
    if (dist <= same) found = true;
    else d = std::min(d, dist);
  }
  if (!found) throw Error(ErrorCode::InvalidArgument, "requested point is not a resonance point");
  double radius = std::min(0.5 * d, cap);
  if (radius < 1e-8 * std::max(1.0, std::abs(r)))
    throw Error(ErrorCode::ContourTooClose, "another resonance point lies within the contour floor");
  return radius;
}

LaurentData laurent_data(const OperatorModel& m, const SpectralPoint& z, cplx r, double radius, int kmax) {
  const auto n = model_dim(m);
  const CMatrix j = model_J_full(m).matrix();
  const int blocks = kmax + 1;
  auto f = [&](cplx s) -> CMatrix {
    CMatrix t = model_T(m, z, s);
    CMatrix a = t * j;
    CMatrix b = j * t;
    CMatrix out(n, 2 * n * blocks);
    cplx w = 1.0;
    for (int k = 0; k < blocks; ++k) {
      out.block(0, k * n, n, n) = w * a;
      out.block(0, (blocks + k) * n, n, n) = w * b;
      w *= (s - r);
    }
    return out;
  };
  auto res = circle_integral_adaptive(f, r, radius, 32, 1e-11, 4096);
  LaurentData ld;
  ld.r = r;
  ld.radius = radius;
  ld.nodes = res.nodes;
  for (int k = 0; k < blocks; ++k) {
    ld.nilA_pow.push_back(res.value.block(0, k * n, n, n));
    ld.nilB_pow.push_back(res.value.block(0, (blocks + k) * n, n, n));
  }
  ld.P = ld.nilA_pow[0];
  ld.Q = ld.nilB_pow[0];
  return ld;
}

CMatrix sigma_plane_projector(const OperatorModel& m, const SpectralPoint& z, cplx r, double s_radius) {
  cplx s0 = r + s_radius;
  if (!(coupling_condition(m, z, s0) < 1e10)) s0 = r - s_radius;
  cplx sigma0 = 1.0 / (s0 - r);
  CMatrix a = op_A_only(m, z, s0);
  double d_other = std::numeric_limits<double>::infinity();
  for (auto e : eigenvalues(a)) {
    double d = std::abs(e - sigma0);
    if (d > 0.3 * std::abs(sigma0)) d_other = std::min(d_other, d);
  }
  double rho = std::min(0.5 * d_other, 0.5 * std::abs(sigma0));
  const auto n = a.rows();
  auto f = [&](cplx zeta) -> CMatrix { return (zeta * CMatrix::Identity(n, n) - a).partialPivLu().inverse(); };
  return circle_integral_adaptive(f, sigma0, rho, 32, 1e-11, 4096).value;
}

Idempotents riesz_idempotents(const OperatorModel& m, const SpectralPoint& z, cplx r) {
  double radius = isolation_radius(m, z, r);
  auto ld = laurent_data(m, z, r, radius, 0);
  CMatrix ps = sigma_plane_projector(m, z, r, radius);
  double residual = max_abs(ps - ld.P) / std::max(1.0, max_abs(ld.P));
  return {ld.P, ld.Q, residual};
}

Nilpotents nilpotents(const OperatorModel& m, const SpectralPoint& z, cplx r) {
  double radius = isolation_radius(m, z, r);
  auto ld = laurent_data(m, z, r, radius, 1);
  return {ld.nilA_pow[1], ld.nilB_pow[1]};
}

namespace {

int projector_rank(const CMatrix& p) {
  int by_trace = static_cast<int>(std::lround(p.trace().real()));
  return std::max(by_trace, 0);
}

CMatrix upsilon_from(const CMatrix& a_s, cplx s, cplx r, const CMatrix& u_range, int k) {
  const auto n = a_s.rows();
  if (u_range.cols() == 0) return CMatrix(n, 0);
  CMatrix m1 = CMatrix::Identity(n, n) + (r - s) * a_s;
  double full = std::max(norm2(m1), 1.0);
  // M is nilpotent on range P, so rank cuts follow the propagated rounding of M^j U;
  // once M^j U is all noise, every higher power is too
  CMatrix power = u_range;
  int rank = static_cast<int>(u_range.cols());
  Eigen::JacobiSVD<CMatrix> svd;
  for (int j = 1; j <= k && rank > 0; ++j) {
    double prev_top = norm2(power);
    power = m1 * power;
    svd.compute(power, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    double cut = std::max(1e-8 * sv(0), 1e4 * kEps * full * prev_top);
    rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > cut) ++rank;
  }
  if (rank == 0) {
    Eigen::HouseholderQR<CMatrix> qr(u_range);
    return qr.householderQ() * CMatrix::Identity(n, u_range.cols());
  }
  CMatrix coeffs = svd.matrixV().rightCols(u_range.cols() - rank);
  CMatrix basis = u_range * coeffs;
  if (basis.cols() == 0) return basis;
  Eigen::HouseholderQR<CMatrix> qr(basis);
  return qr.householderQ() * CMatrix::Identity(n, basis.cols());
}

CMatrix range_of_projector(const CMatrix& p, int rank) {
  Eigen::JacobiSVD<CMatrix> svd(p, Eigen::ComputeFullU);
  return svd.matrixU().leftCols(rank);
}

}  // namespace

CMatrix resonance_space(const OperatorModel& m, const SpectralPoint& z, cplx s, cplx r, int k) {
  if (!(coupling_condition(m, z, s) < 1e12)) throw Error(ErrorCode::ResonantCoupling, "probe s is resonant");
  double radius = isolation_radius(m, z, r);
  auto ld = laurent_data(m, z, r, radius, 0);
  int n_rank = projector_rank(ld.P);
  CMatrix u = range_of_projector(ld.P, n_rank);
  return upsilon_from(op_A_only(m, z, s), s, r, u, k);
}

std::vector<int> chain_lengths_from_ranks(const std::vector<int>& ranks) {
  // ranks[j] = rank of nilA^j on range P, ranks[0] = N
  std::vector<int> lengths;
  for (std::size_t j = 1; j < ranks.size(); ++j) {
    int at_least_j = ranks[j - 1] - ranks[j];
    int at_least_j1 = j + 1 < ranks.size() ? ranks[j] - ranks[j + 1] : ranks[j];
    for (int c = 0; c < at_least_j - at_least_j1; ++c) lengths.push_back(static_cast<int>(j));
  }
  std::sort(lengths.rbegin(), lengths.rend());
  return lengths;
}

ResonancePointRecord point_structure(const OperatorModel& m, const SpectralPoint& z, cplx r) {
  ResonancePointRecord rec;
  rec.r = r;
  rec.radius = isolation_radius(m, z, r);
  auto ld = laurent_data(m, z, r, rec.radius, 2);
  rec.P = ld.P;
  rec.Q = ld.Q;
  CMatrix ps = sigma_plane_projector(m, z, r, rec.radius);
  rec.sigma_s_residual = max_abs(ps - ld.P) / std::max(1.0, max_abs(ld.P));
  int n_rank = projector_rank(ld.P);
  rec.alg_mult_N = n_rank;
  CMatrix u = range_of_projector(ld.P, n_rank);

  // weighted residues about a slightly misplaced centre pick up (r_true - r) P
  cplx r_eff = r;
  if (n_rank > 0) {
    cplx shift = ld.nilA_pow[1].trace() / static_cast<double>(n_rank);
    if (std::abs(shift) < 1e-3 * rec.radius) {
      r_eff = r + shift;
      CMatrix a1 = ld.nilA_pow[1];
      ld.nilA_pow[1] -= shift * ld.P;
      ld.nilB_pow[1] -= shift * ld.Q;
      ld.nilA_pow[2] += -2.0 * shift * a1 + shift * shift * ld.P;
    }
  }

  double pn = std::max(1.0, norm2(ld.P));
  double an = norm2(ld.nilA_pow[1]);
  bool nil_zero = an <= 1e-7 * rec.radius * pn;
  rec.nilA = nil_zero ? CMatrix::Zero(ld.P.rows(), ld.P.cols()) : ld.nilA_pow[1];
  rec.nilB = nil_zero ? CMatrix::Zero(ld.Q.rows(), ld.Q.cols()) : ld.nilB_pow[1];
  if (!nil_zero) {
    double w2 = max_abs(ld.nilA_pow[2] - rec.nilA * rec.nilA) / std::max(max_abs(ld.nilA_pow[2]), an * an);
    if (w2 > 1e-6) rec.diagnostics.push_back("weighted residue (s-r)^2 differs from nilA^2 by " + std::to_string(w2));
  }

  // rank staircase of nilA on range P
  std::vector<int> ranks{n_rank};
  if (n_rank > 0) {
    CMatrix k = u.adjoint() * rec.nilA * u;
    double kn = norm2(k);
    CMatrix kp = CMatrix::Identity(n_rank, n_rank);
    for (int j = 1; j <= n_rank; ++j) {
      kp = kp * k;
      int rk = 0;
      if (kn > 0) {
        Eigen::JacobiSVD<CMatrix> svd(kp / std::pow(kn, j));
        const auto& sv = svd.singularValues();
        for (Eigen::Index i = 0; i < sv.size(); ++i)
          if (sv(i) > 1e-6) ++rk;
      }
      ranks.push_back(rk);
      if (rk == 0) break;
    }
  }
  rec.jordan_chain_lengths = chain_lengths_from_ranks(ranks);

  // Upsilon^k by stabilization at a probe on the contour
  cplx s = r + rec.radius;
  if (!(coupling_condition(m, z, s) < 1e10)) s = r - rec.radius;
  rec.probe_s = s.real();
  CMatrix a_s = op_A_only(m, z, s);
  int prev = -1;
  for (int k = 1; k <= n_rank + 1; ++k) {
    CMatrix basis = upsilon_from(a_s, s, r_eff, u, k);
    int dim = static_cast<int>(basis.cols());
    if (dim == prev) {
      rec.order_d = k - 1;
      break;
    }
    rec.upsilon_bases.push_back(basis);
    prev = dim;
  }
  if (rec.order_d == 0) rec.order_d = static_cast<int>(rec.upsilon_bases.size());
  rec.geom_mult_m = rec.upsilon_bases.empty() ? 0 : static_cast<int>(rec.upsilon_bases[0].cols());
  int dim_d = rec.upsilon_bases.empty() ? 0 : static_cast<int>(rec.upsilon_bases.back().cols());
  if (dim_d != n_rank)
    rec.diagnostics.push_back("dim Upsilon^d = " + std::to_string(dim_d) + " but rank P = " + std::to_string(n_rank));
  int chain_max = rec.jordan_chain_lengths.empty() ? 0 : rec.jordan_chain_lengths.front();
  if (chain_max != rec.order_d)
    rec.diagnostics.push_back("longest Jordan chain " + std::to_string(chain_max) + " differs from order " +
                              std::to_string(rec.order_d));
  rec.nilA_pow.push_back(rec.P);
  for (int j = 1; j <= rec.order_d; ++j) rec.nilA_pow.push_back(rec.nilA_pow.back() * rec.nilA);
  return rec;
}

CMatrix group_idempotent(const OperatorModel& m, const SpectralPoint& z, cplx center, double radius) {
  return laurent_data(m, z, center, radius, 0).P;
}

double nearest_other_distance(const OperatorModel& m, double lambda, double r) {
  auto z = SpectralPoint::plus(lambda);
  double cap = std::max(1.0, std::abs(r));
  cplx s = choose_probe(m, z, 1e8, r + 0.5 * cap);
  auto pts = find_resonance_points(m, z, s, std::nullopt, {});
  double same = 1e-6 * std::max(1.0, std::abs(r));
  double d = std::numeric_limits<double>::infinity();
  for (const auto& p : pts) {
    double dist = std::abs(p.r - r);
    if (dist > same) d = std::min(d, dist);
  }
  return d;
}

namespace {

std::vector<SplitPoint> group_points(const OperatorModel& m, const SpectralPoint& z, double r, double ball) {
  Disk disk{r, ball};
  double s = r + 1.5 * ball;
  if (!(coupling_condition(m, z, s) < 1e10)) s = r - 1.5 * ball;
  auto pts = find_resonance_points(m, z, s, disk, {});
  std::vector<SplitPoint> out;
  for (const auto& p : pts) out.push_back({p.r, p.alg_mult});
  return out;
}

int total_mult(const std::vector<SplitPoint>& v) {
  int n = 0;
  for (const auto& p : v) n += p.mult;
  return n;
}

}  // namespace

GroupSplitting group_splitting(const OperatorModel& m, double lambda, double r_lambda, std::optional<double> y) {
  GroupSplitting g;
  g.r_lambda = r_lambda;
  double d_other = nearest_other_distance(m, lambda, r_lambda);
  double scale = std::max(1.0, std::abs(r_lambda));
  g.ball_radius = std::isfinite(d_other) ? std::min(d_other / 3.0, scale) : scale;

  auto plus = point_structure(m, SpectralPoint::plus(lambda), r_lambda);
  auto minus = point_structure(m, SpectralPoint::minus(lambda), r_lambda);
  g.N = plus.alg_mult_N;
  g.P_plus_i0 = plus.P;
  g.Q_plus_i0 = plus.Q;
  g.nilA_plus_i0 = plus.nilA;
  g.P_minus_i0 = minus.P;
  g.Q_minus_i0 = minus.Q;
  g.nilA_minus_i0 = minus.nilA;
  g.plus_record = plus;
  g.minus_record = minus;
  if (minus.alg_mult_N != g.N)
    g.diagnostics.push_back("N at lambda-i0 differs: " + std::to_string(minus.alg_mult_N));

  const double im_floor = 1e3 * kEps * std::abs(r_lambda) + 1e-12;
  auto acceptable = [&](const std::vector<SplitPoint>& pts) {
    if (total_mult(pts) != g.N) return false;
    for (const auto& p : pts) {
      if (!(std::abs(p.r.imag()) > 1e4 * kEps)) return false;
      if (std::abs(p.r - r_lambda) > 0.5 * g.ball_radius) return false;
    }
    return true;
  };

  if (y) {
    g.y_used = *y;
    g.split_points = group_points(m, SpectralPoint::off_axis(lambda, *y), r_lambda, g.ball_radius);
    if (total_mult(g.split_points) != g.N)
      throw Error(ErrorCode::GroupingUnstable, "group count differs from N at the requested y");
  } else {
    double yy = (std::isfinite(d_other) ? d_other : 1.0) / 10.0;
    int stable = 0;
    std::vector<SplitPoint> last;
    double last_y = 0.0;
    while (true) {
      if (yy < 1e-9) throw Error(ErrorCode::GroupingUnstable, "group count did not stabilise above y floor");
      auto pts = group_points(m, SpectralPoint::off_axis(lambda, yy), r_lambda, g.ball_radius);
      if (acceptable(pts)) {
        ++stable;
        if (stable == 1) {
          last = pts;
          last_y = yy;
        }
        if (stable >= 2) break;
      } else {
        stable = 0;
      }
      yy /= 2.0;
    }
    g.split_points = last;
    g.y_used = last_y;
  }
  for (const auto& p : g.split_points) {
    if (std::abs(p.r.imag()) <= im_floor)
      throw Error(ErrorCode::RealSplitPoint, "split point is numerically real");
    if (p.r.imag() > 0) g.N_plus += p.mult;
    else g.N_minus += p.mult;
  }
  g.split_points_conj = group_points(m, SpectralPoint::off_axis(lambda, -g.y_used), r_lambda, g.ball_radius);
  for (const auto& p : g.split_points) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : g.split_points_conj) best = std::min(best, std::abs(std::conj(p.r) - q.r));
    if (best > 1e-7 * scale) g.diagnostics.push_back("conjugate group mismatch " + std::to_string(best));
  }

  auto zp = SpectralPoint::off_axis(lambda, g.y_used);
  auto zm = SpectralPoint::off_axis(lambda, -g.y_used);
  g.P_group = group_idempotent(m, zp, r_lambda, g.ball_radius);
  CMatrix p_conj = group_idempotent(m, zm, r_lambda, g.ball_radius);

  // (1/pi) \oint Im T J ds = P(lambda+iy) - P(lambda-iy)
  const CMatrix j = model_J_full(m).matrix();
  auto f = [&](cplx s) -> CMatrix { return im_T(m, zp, s) * j; };
  CMatrix lhs = cplx(0.0, 2.0) * circle_integral_adaptive(f, r_lambda, g.ball_radius, 32, 1e-11).value;
  g.contour_identity_residual = max_abs(lhs - (g.P_group - p_conj)) / std::max(1.0, max_abs(g.P_group));

  // Richardson extrapolation y -> 0 against the direct boundary values
  double ye = std::min(g.y_used / 4.0, 1e-4);
  auto extrap = [&](double sign) {
    CMatrix p1 = group_idempotent(m, SpectralPoint::off_axis(lambda, sign * ye), r_lambda, g.ball_radius);
    CMatrix p2 = group_idempotent(m, SpectralPoint::off_axis(lambda, sign * ye / 2), r_lambda, g.ball_radius);
    CMatrix p4 = group_idempotent(m, SpectralPoint::off_axis(lambda, sign * ye / 4), r_lambda, g.ball_radius);
    return CMatrix((p1 - 6.0 * p2 + 8.0 * p4) / 3.0);
  };
  double e1 = max_abs(extrap(1.0) - g.P_plus_i0) / std::max(1.0, max_abs(g.P_plus_i0));
  double e2 = max_abs(extrap(-1.0) - g.P_minus_i0) / std::max(1.0, max_abs(g.P_minus_i0));
  g.extrapolation_residual = std::max(e1, e2);
  if (g.extrapolation_residual > 1e-6)
    g.diagnostics.push_back("boundary extrapolation residual " + std::to_string(g.extrapolation_residual));
  return g;
}

}  // namespace resflow

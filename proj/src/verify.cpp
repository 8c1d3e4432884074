#include "resflow/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

#include "resflow/boundary.hpp"
#include "resflow/index_flow.hpp"
#include "resflow/report.hpp"

namespace resflow {

namespace {

std::string num(double x, int digits = 3) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

}  // namespace

TrialInstance make_trial(std::uint64_t seed, int trial, int dim_lo, int dim_hi) {
  TrialInstance t;
  t.seed = seed * 1000003ull + static_cast<std::uint64_t>(trial);
  Rng rng(t.seed);
  std::uniform_int_distribution<int> dim(dim_lo, dim_hi);
  const int n = dim(rng);
  std::uniform_int_distribution<int> rk(1, n);
  const int rank = rk(rng);
  t.pencil = random_pencil(rng, n, rank);
  std::uniform_real_distribution<double> lam(-0.8, 0.8), y(0.1, 1.0), s(-1.0, 1.0);
  t.lambda = lam(rng);
  t.z = SpectralPoint::off_axis(lam(rng), y(rng));
  t.s = s(rng);
  return t;
}

double AlgebraResiduals::worst() const {
  return std::max({idempotent, orthogonal, intertwine, nilpotent, laurent, sigma_s});
}

AlgebraResiduals idempotent_algebra(const OperatorModel& m, const SpectralPoint& z) {
  AlgebraResiduals out;
  const CMatrix j = model_J_full(m).matrix();
  const double jn = std::max(norm2(j), 1e-300);
  std::vector<CMatrix> ps;
  for (const auto& pt : find_resonance_points(m, z)) {
    auto rec = point_structure(m, z, pt.r);
    const double pn = norm2(rec.P);
    out.idempotent = std::max(out.idempotent, norm2(rec.P * rec.P - rec.P) / pn);
    out.intertwine = std::max(out.intertwine, norm2(j * rec.P - rec.Q * j) / (jn * pn));
    const double rad = rec.radius;
    out.nilpotent =
        std::max(out.nilpotent, norm2(matrix_power(rec.nilA, rec.order_d)) / (pn * std::pow(rad, rec.order_d)));
    cplx s = rec.r + cplx(0.5 * rad, 0.0);
    CMatrix lhs = op_A_only(m, z, s) * rec.P;
    CMatrix rhs = CMatrix::Zero(lhs.rows(), lhs.cols());
    CMatrix np = rec.P;
    for (int k = 0; k < rec.order_d; ++k) {
      rhs += std::pow(s - rec.r, -(k + 1)) * np;
      np = rec.nilA * np;
    }
    out.laurent = std::max(out.laurent, norm2(lhs - rhs) / std::max(norm2(lhs), 1e-300));
    out.sigma_s = std::max(out.sigma_s, rec.sigma_s_residual);
    for (const auto& q : ps) out.orthogonal = std::max(out.orthogonal, norm2(q * rec.P) / (norm2(q) * pn));
    ps.push_back(rec.P);
    ++out.points;
  }
  return out;
}

double resolvent_identity_residual(const OperatorModel& m, const SpectralPoint& z, cplx r, cplx s) {
  CMatrix ar = op_A_only(m, z, r), as = op_A_only(m, z, s);
  CMatrix lhs = ar - as, rhs = (s - r) * ar * as;
  double scale = std::max({norm2(ar), norm2(as), std::abs(s - r) * norm2(ar) * norm2(as)});
  return norm2(lhs - rhs) / scale;
}

namespace {

struct GammaMatrices {
  CMatrix P, Q;
};

GammaMatrices gamma_sum(const OperatorModel& m, const SpectralPoint& z, const std::vector<cplx>& gamma) {
  const auto n = model_dim(m);
  GammaMatrices g{CMatrix::Zero(n, n), CMatrix::Zero(n, n)};
  for (cplx r : gamma) {
    g.P += riesz_idempotents(m, z, r).P;
    g.Q += riesz_idempotents(m, z.conj(), std::conj(r)).Q;
  }
  return g;
}

}  // namespace

PositivityCheck up_point_positivity(const OperatorModel& m, const SpectralPoint& z) {
  PositivityCheck out;
  std::vector<cplx> up;
  for (const auto& p : find_resonance_points(m, z))
    if (p.r.imag() > 0) up.push_back(p.r);
  out.up_points = static_cast<int>(up.size());
  if (up.empty()) return out;
  auto g = gamma_sum(m, z, up);
  CMatrix mm = z.y * g.Q * model_J_full(m).matrix() * g.P;
  HermitianMatrix h((mm + mm.adjoint()) / 2.0, 1e300);
  auto e = eig_hermitian(h);
  double scale = std::max(e.values.cwiseAbs().maxCoeff(), 1e-300);
  out.min_eig_rel = e.values.minCoeff() / scale;
  out.rank = 0;
  for (Eigen::Index i = 0; i < e.values.size(); ++i)
    if (std::abs(e.values(i)) > 1e-8 * scale) ++out.rank;
  out.rank_P = static_cast<int>(std::lround(g.P.trace().real()));
  return out;
}

SignatureCheck set_signature_vs_rindex(const OperatorModel& m, const SpectralPoint& z, std::uint64_t mask) {
  SignatureCheck out;
  std::vector<cplx> gamma;
  auto pts = find_resonance_points(m, z);
  for (std::size_t i = 0; i < pts.size(); ++i)
    if ((mask >> (i % 64)) & 1u) gamma.push_back(pts[i].r);
  if (gamma.empty()) return out;
  auto g = gamma_sum(m, z, gamma);
  CMatrix mm = g.Q * model_J_full(m).matrix() * g.P;
  out.signature = signature(HermitianMatrix((mm + mm.adjoint()) / 2.0, 1e300), 1e-8).sign();
  double s = choose_probe(m, z);
  out.rindex = r_index(z.y * op_A_only(m, z, s) * g.P);
  return out;
}

bool VerifySummary::all_passed() const {
  return std::all_of(properties.begin(), properties.end(), [](const PropertyTally& p) { return p.failed == 0; });
}

std::string VerifySummary::text() const {
  std::ostringstream os;
  os << "trials: " << trials << "\n";
  for (const auto& p : properties) {
    os << p.name << ": " << p.passed << " passed, " << p.failed << " failed, " << p.errored << " conditioning errors\n";
    for (const auto& f : p.failures) os << "  " << f << "\n";
  }
  os << (all_passed() ? "ALL PASSED" : "FAILURES PRESENT") << "\n";
  return os.str();
}

VerifySummary run_verify(const VerifyOptions& opt) {
  VerifySummary sum;
  sum.trials = opt.trials;
  const double ts = opt.corrupt ? 1e-30 : opt.tol_scale;
  const char* names[] = {"resolvent_identity", "idempotent_algebra", "krein",          "three_way_index",
                         "uturn",              "up_point_positivity", "set_signature",  "flow_identity",
                         "f_independence",     "boundary_chain"};
  for (const char* n : names) sum.properties.push_back(PropertyTally{n, 0, 0, 0, {}});
  auto tally = [&](std::size_t idx) -> PropertyTally& { return sum.properties[idx]; };

  for (int trial = 0; trial < opt.trials; ++trial) {
    TrialInstance t = make_trial(opt.seed, trial, opt.dim_lo, opt.dim_hi);
    const OperatorModel m = t.pencil;
    auto dump = [&] { return model_to_json(m).dump(); };
    auto run = [&](std::size_t idx, const std::function<std::optional<std::string>()>& check) {
      auto& p = tally(idx);
      std::optional<std::string> fail;
      try {
        fail = check();
      } catch (const Error& e) {
        if (is_conditioning_error(e.code())) {
          ++p.errored;
          return;
        }
        fail = std::string("error ") + e.what();
      }
      if (!fail) {
        ++p.passed;
        return;
      }
      ++p.failed;
      if (static_cast<int>(p.failures.size()) < opt.max_dumps)
        p.failures.push_back("trial " + std::to_string(trial) + " (seed " + std::to_string(t.seed) + "): " + *fail +
                             "; instance " + dump() + "; lambda " + num(t.lambda, 17));
    };
    auto over = [&](double v, double tol, const char* what) -> std::optional<std::string> {
      if (v <= tol * ts) return std::nullopt;
      return std::string(what) + " = " + num(v);
    };

    run(0, [&] {
      return over(resolvent_identity_residual(m, t.z, cplx(t.s, 0.0), cplx(t.s + 0.37, 0.11)), 1e-9,
                  "resolvent identity residual");
    });
    run(1, [&] { return over(idempotent_algebra(m, t.z).worst(), 1e-7, "worst algebra residual"); });
    run(2, [&]() -> std::optional<std::string> {
      auto k = krein_sign_check(t.pencil, t.z, t.s);
      if (k.agree) return std::nullopt;
      return "Rindex " + std::to_string(k.rindex) + " vs sign V " + std::to_string(k.sign_v);
    });

    std::optional<FlowReport> flow;
    try {
      flow = total_resonance_index(m, t.lambda, 0.0, 1.0);
    } catch (const Error&) {
    }
    auto need_flow = [&] {
      if (!flow) flow = total_resonance_index(m, t.lambda, 0.0, 1.0);
      return *flow;
    };
    run(3, [&]() -> std::optional<std::string> {
      for (const auto& ir : need_flow().per_point)
        if (!(ir.ind_splitting == ir.ind_rindex && ir.ind_rindex == ir.ind_signature))
          return "indices " + std::to_string(ir.ind_splitting) + "/" + std::to_string(ir.ind_rindex) + "/" +
                 std::to_string(ir.ind_signature) + " at r = " + num(ir.r_lambda);
      return std::nullopt;
    });
    run(4, [&]() -> std::optional<std::string> {
      for (const auto& ir : need_flow().per_point)
        if (std::abs(ir.index()) > ir.dim_upsilon1)
          return "|ind| " + std::to_string(std::abs(ir.index())) + " > dim U1 " + std::to_string(ir.dim_upsilon1);
      return std::nullopt;
    });
    run(5, [&]() -> std::optional<std::string> {
      auto pc = up_point_positivity(m, t.z);
      if (pc.ok(1e-8 * ts)) return std::nullopt;
      return "min eig " + num(pc.min_eig_rel) + ", rank " + std::to_string(pc.rank) + " vs " +
             std::to_string(pc.rank_P);
    });
    run(6, [&]() -> std::optional<std::string> {
      auto sc = set_signature_vs_rindex(m, t.z, t.seed * 0x9E3779B97F4A7C15ull | 1u);
      if (sc.ok()) return std::nullopt;
      return "signature " + std::to_string(sc.signature) + " vs Rindex " + std::to_string(sc.rindex);
    });
    run(7, [&]() -> std::optional<std::string> {
      const auto& f = need_flow();
      int ssf = ssf_counting(t.pencil, t.lambda, 0.0, 1.0);
      int track = spectral_flow_oracle(t.pencil, t.lambda, 0.0, 1.0);
      if (f.total == ssf && ssf == track) return std::nullopt;
      return "total " + std::to_string(f.total) + ", ssf " + std::to_string(ssf) + ", tracking " + std::to_string(track);
    });
    run(8, [&]() -> std::optional<std::string> {
      Rng rng(t.seed ^ 0xF00Dull);
      OperatorModel rigged = rerig(t.pencil, random_rigging(rng, t.pencil.h0.size()));
      for (const auto& ir : need_flow().per_point) {
        int other = resonance_index(rigged, t.lambda, ir.r_lambda).index();
        if (other != ir.index())
          return "index " + std::to_string(ir.index()) + " became " + std::to_string(other) + " under F";
      }
      return std::nullopt;
    });
    run(9, [&]() -> std::optional<std::string> {
      for (const auto& ir : need_flow().per_point) {
        auto cl = classify_point(m, t.lambda, ir.r_lambda);
        if (cl.type_I_point != TypeI::yes) return "finite pencil point not type I";
        if (!cl.property_P || !cl.property_S) return "type I without properties P and S";
        if (!cl.pp_spectrum_ok) return "spectrum of P+P- outside {0,1}";
        if (!cl.property_M) return "property M rank deficit";
        if (cl.delta_jp_delta > 1e-7 * ts) return "delta J P delta = " + num(cl.delta_jp_delta);
      }
      return std::nullopt;
    });
  }
  return sum;
}

}  // namespace resflow

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "resflow/boundary.hpp"
#include "resflow/builtins.hpp"
#include "resflow/embedded.hpp"
#include "resflow/index_flow.hpp"
#include "resflow/verify.hpp"

using namespace resflow;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;
double total_seconds = 0.0;

void criterion(int id, const char* title, double budget_s, const std::function<Outcome()>& body) {
  auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("unexpected error: ") + e.what()};
  }
  double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  total_seconds += secs;
  if (budget_s > 0 && secs > budget_s) {
    o.pass = false;
    o.detail += "; over the " + std::to_string(budget_s) + " s budget";
  }
  if (!o.pass) ++failures;
  std::printf("[%s] criterion %2d: %s (%.2f s) %s\n", o.pass ? "PASS" : "FAIL", id, title, secs, o.detail.c_str());
  std::fflush(stdout);
}

std::string str(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

bool is_declared(const Error& e) { return is_conditioning_error(e.code()); }

}  // namespace

int main() {
  criterion(1, "three-level example: index 1 by every route", 1.0, [] {
    std::ostringstream os;
    bool ok = true;
    for (double eps : {0.5, 1.0}) {
      auto p = three_level_example(eps);
      auto ir = resonance_index(p, 0.0, 0.0);
      int track = spectral_flow_oracle(p, 0.0, -0.5, 0.5);
      os << "eps=" << eps << ": " << ir.ind_splitting << "/" << ir.ind_rindex << "/" << ir.ind_signature
         << " tracking " << track << "; ";
      ok = ok && ir.ind_splitting == 1 && ir.ind_rindex == 1 && ir.ind_signature == 1 && track == 1;
    }
    return Outcome{ok, os.str()};
  });

  criterion(2, "four-level example: (order, index) = (3, 1) and (4, 0)", 2.0, [] {
    auto a = resonance_index(four_level_example(-4.0), 0.0, 0.0);
    auto b = resonance_index(four_level_example(-3.0), 0.0, 0.0);
    std::ostringstream os;
    os << "first coupling (" << a.order_d << ", " << a.index() << "), second (" << b.order_d << ", " << b.index()
       << ")";
    bool ok = a.order_d == 3 && a.index() == 1 && b.order_d == 4 && b.index() == 0;
    if (a.index() != 1)
      os << "; the order-3 point splits into N+ = " << a.N_plus << ", N- = " << a.N_minus
         << " and eigenvalue tracking gives " << spectral_flow_oracle(four_level_example(-4.0), 0.0, -0.05, 0.05);
    return Outcome{ok, os.str()};
  });

  criterion(3, "embedded rank-one model with zero base coupling", 0.0, [] {
    std::ostringstream os;
    auto pos = rank_one_index_analysis(scalar_embedded_example(1.0));
    auto neg = rank_one_index_analysis(scalar_embedded_example(-1.0));
    auto zero_model = scalar_embedded_example(0.0);
    auto zero = rank_one_index_analysis(zero_model);
    auto diag = embedded_diagnostics(zero_model);
    bool pairing = std::abs(zero_model.psi_hat.dot(diag.u_hat_plus)) > 1e-8;
    os << "alpha=+1: " << pos.index << " slope " << str(pos.slope.real()) << "+" << str(pos.slope.imag())
       << "i; alpha=-1: " << neg.index << " slope " << str(neg.slope.real()) << "+" << str(neg.slope.imag())
       << "i; alpha=0: " << zero.index << " (N+ " << zero.n_plus << ", N- " << zero.n_minus << ")";
    bool ok = pos.index == 1 && pos.slope_ok && pos.index_matches && neg.index == -1 && neg.slope_ok &&
              neg.index_matches && zero.index == 0 && zero.n_plus == 1 && zero.n_minus == 1 && zero.index_matches &&
              pairing;
    return Outcome{ok, os.str()};
  });

  // shared suite of random pencils for criteria 4, 7 and 8
  std::vector<TrialInstance> suite;
  for (int i = 0; i < 200; ++i) suite.push_back(make_trial(2024, i, 2, 8));
  std::vector<FlowReport> flows(suite.size());
  std::vector<bool> flow_ok(suite.size(), false);

  criterion(4, "three-way index agreement on 200 random pencils", 60.0, [&] {
    int points = 0, bad = 0, errored = 0, undeclared = 0;
    for (std::size_t i = 0; i < suite.size(); ++i) {
      try {
        flows[i] = total_resonance_index(suite[i].pencil, suite[i].lambda, -1.0, 1.0, false);
        flow_ok[i] = true;
      } catch (const Error& e) {
        ++errored;
        if (!is_declared(e)) ++undeclared;
        continue;
      }
      for (const auto& ir : flows[i].per_point) {
        ++points;
        if (!(ir.ind_splitting == ir.ind_rindex && ir.ind_rindex == ir.ind_signature)) ++bad;
      }
    }
    double rate = errored / static_cast<double>(suite.size());
    std::ostringstream os;
    os << points << " points, " << bad << " disagreements, error rate " << str(rate) << " (" << undeclared
       << " undeclared)";
    return Outcome{bad == 0 && rate < 0.02 && undeclared == 0 && points > 0, os.str()};
  });

  criterion(5, "Krein sign check on 100 random instances", 0.0, [] {
    int ok = 0;
    for (int i = 0; i < 100; ++i) {
      auto t = make_trial(55, i, 2, 8);
      if (krein_sign_check(t.pencil, t.z, t.s).agree) ++ok;
    }
    return Outcome{ok == 100, std::to_string(ok) + "/100"};
  });

  criterion(6, "flow identity: total index = ssf = eigenvalue tracking", 0.0, [] {
    int ok = 0, errored = 0;
    std::string first;
    for (int i = 0; i < 100; ++i) {
      auto t = make_trial(66, i, 2, 8);
      try {
        int total = total_resonance_index(t.pencil, t.lambda, 0.0, 1.0).total;
        int ssf = ssf_counting(t.pencil, t.lambda, 0.0, 1.0);
        int track = spectral_flow_oracle(t.pencil, t.lambda, 0.0, 1.0);
        if (total == ssf && ssf == track) ++ok;
        else if (first.empty())
          first = "; trial " + std::to_string(i) + ": " + std::to_string(total) + "/" + std::to_string(ssf) + "/" +
                  std::to_string(track);
      } catch (const Error& e) {
        ++errored;
        if (first.empty()) first = std::string("; ") + e.what();
      }
    }
    return Outcome{ok == 100, std::to_string(ok) + "/100, " + std::to_string(errored) + " errors" + first};
  });

  criterion(7, "U-turn bound and up-point positivity", 0.0, [&] {
    int checked = 0, uturn_bad = 0;
    for (std::size_t i = 0; i < suite.size(); ++i) {
      if (!flow_ok[i]) continue;
      for (const auto& ir : flows[i].per_point) {
        ++checked;
        if (std::abs(ir.index()) > ir.dim_upsilon1) ++uturn_bad;
      }
    }
    int pos_ok = 0, pos_n = 0;
    double worst = 0.0;
    for (std::size_t i = 0; i < 100; ++i) {
      auto pc = up_point_positivity(suite[i].pencil, suite[i].z);
      ++pos_n;
      worst = std::min(worst, pc.min_eig_rel);
      if (pc.ok(1e-8)) ++pos_ok;
    }
    std::ostringstream os;
    os << "U-turn bound " << checked - uturn_bad << "/" << checked << ", positivity " << pos_ok << "/" << pos_n
       << " (worst relative eigenvalue " << str(worst) << ")";
    return Outcome{uturn_bad == 0 && pos_ok == pos_n, os.str()};
  });

  criterion(8, "Riesz idempotent algebra residuals <= 1e-7", 0.0, [&] {
    AlgebraResiduals worst;
    int points = 0, errored = 0;
    for (std::size_t i = 0; i < 100; ++i) {
      try {
        auto a = idempotent_algebra(suite[i].pencil, suite[i].z);
        points += a.points;
        worst.idempotent = std::max(worst.idempotent, a.idempotent);
        worst.orthogonal = std::max(worst.orthogonal, a.orthogonal);
        worst.intertwine = std::max(worst.intertwine, a.intertwine);
        worst.nilpotent = std::max(worst.nilpotent, a.nilpotent);
        worst.laurent = std::max(worst.laurent, a.laurent);
        worst.sigma_s = std::max(worst.sigma_s, a.sigma_s);
      } catch (const Error&) {
        ++errored;
      }
    }
    std::ostringstream os;
    os << points << " points; max P^2-P " << str(worst.idempotent) << ", PP " << str(worst.orthogonal) << ", JP-QJ "
       << str(worst.intertwine) << ", nilA^d " << str(worst.nilpotent) << ", Laurent " << str(worst.laurent)
       << ", sigma/s " << str(worst.sigma_s) << ", " << errored << " errors";
    return Outcome{worst.worst() <= 1e-7 && errored == 0, os.str()};
  });

  criterion(9, "boundary idempotents: spectrum of P+P- and property M", 0.0, [] {
    int ok = 0, n = 0;
    std::ostringstream os;
    for (int order = 2; order <= 4; ++order)
      for (std::uint64_t seed = 0; seed < 4; ++seed) {
        ++n;
        OperatorModel m = embedded_continuum_example(order, seed);
        auto bd = boundary_data(m, 0.0, 0.0);
        const int N = bd.plus.alg_mult_N;
        bool good = true;
        int ones = 0;
        for (cplx e : eigenvalues(CMatrix(bd.plus.P * bd.minus.P))) {
          if (std::abs(e - 1.0) <= 1e-6) ++ones;
          else if (std::abs(e) > 1e-6) good = false;
        }
        good = good && ones == N;
        // P+ restricted to the range of P- (and the other way) has full rank N
        auto range = [](const CMatrix& p, int k) {
          return CMatrix(Eigen::JacobiSVD<CMatrix>(p, Eigen::ComputeFullU).matrixU().leftCols(k));
        };
        good = good && numerical_rank(CMatrix(bd.plus.P * range(bd.minus.P, N))) == N &&
               numerical_rank(CMatrix(bd.minus.P * range(bd.plus.P, N))) == N;
        if (good) ++ok;
        else os << "order " << order << " seed " << seed << " fails; ";
      }
    os << ok << "/" << n << " instances";
    return Outcome{ok == n, os.str()};
  });

  criterion(10, "classification witnesses", 0.0, [] {
    std::ostringstream os;
    auto a = classify_point(embedded_continuum_example(2, 0), 0.0, 0.0);
    bool wa = a.N == 2 && !a.property_S;
    auto b = classify_point(decoupled_embedded_example(), 0.0, 0.0);
    bool wb = b.property_S && !b.property_P && b.type_I_point != TypeI::yes;
    int c_ok = 0, c_n = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed, ++c_n)
      if (classify_point(embedded_continuum_example(1, seed), 0.0, 0.0).type_I_point == TypeI::yes) ++c_ok;
    for (double eps : {0.5, 1.0}) {
      ++c_n;
      auto c = classify_point(three_level_example(eps), 0.0, 0.0);
      if (c.outside_essential && c.type_I_point == TypeI::yes) ++c_ok;
    }
    for (int i = 0; i < 10; ++i) {
      auto t = make_trial(77, i, 2, 6);
      for (double r : real_resonance_points(t.pencil, t.lambda, -1.0, 1.0)) {
        ++c_n;
        auto c = classify_point(t.pencil, t.lambda, r);
        if (c.outside_essential && c.type_I_point == TypeI::yes) ++c_ok;
      }
    }
    os << "(a) order-2 point without S: " << (wa ? "found" : "missing") << "; (b) S without P: "
       << (wb ? "found" : "missing") << "; (c) type I " << c_ok << "/" << c_n;
    return Outcome{wa && wb && c_ok == c_n, os.str()};
  });

  criterion(11, "order constructor, d = 1..5, 20 seeds each", 0.0, [] {
    int ok = 0, n = 0;
    std::string first;
    for (int d = 1; d <= 5; ++d)
      for (std::uint64_t seed = 0; seed < 20; ++seed) {
        ++n;
        try {
          auto p = construct_finite_example(0.0, d, seed);
          int got = point_structure(p, SpectralPoint::plus(0.0), 0.0).order_d;
          if (got == d) ++ok;
          else if (first.empty()) first = "; d=" + std::to_string(d) + " seed " + std::to_string(seed) + " gave " + std::to_string(got);
        } catch (const Error& e) {
          if (first.empty()) first = std::string("; ") + e.what();
        }
      }
    return Outcome{ok == n, std::to_string(ok) + "/" + std::to_string(n) + first};
  });

  bool in_budget = total_seconds < 300.0;
  if (!in_budget) ++failures;
  std::printf("[%s] total runtime %.1f s (budget 300 s)\n", in_budget ? "PASS" : "FAIL", total_seconds);
  std::printf("%d criterion failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}

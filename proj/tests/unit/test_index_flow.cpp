#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "resflow/builtins.hpp"
#include "resflow/embedded.hpp"
#include "resflow/index_flow.hpp"

using namespace resflow;

namespace {

// H_r = [[0, c], [c, 0]] + r diag(1, -1): the upper eigenvalue sqrt(r^2 + c^2) touches c at r = 0.
FinitePencil u_turn(double c) {
  CMatrix h(2, 2);
  h << 0, c, c, 0;
  return FinitePencil::make(HermitianMatrix(h), HermitianMatrix::diagonal({1, -1}));
}

}  // namespace

TEST_CASE("r_index") {
  CHECK(r_index(CMatrix::Zero(3, 3)) == 0);
  CVector d(3);
  d << cplx(0, 1), cplx(0, 1), cplx(0, -2);
  CHECK(r_index(CMatrix(d.asDiagonal())) == 1);
  CMatrix real = CMatrix::Identity(2, 2);
  CHECK_THROWS_AS(r_index(real), Error);
}

TEST_CASE("r_index of AB equals that of BA") {
  Rng rng(9);
  for (int k = 0; k < 10; ++k) {
    auto p = random_pencil(rng, 4, 2 + k % 3);
    auto z = SpectralPoint::off_axis(0.1, 0.5);
    CMatrix t = finite_T(p, z, 0.3);
    CHECK(r_index(CMatrix(t * p.j.matrix())) == r_index(CMatrix(p.j.matrix() * t)));
  }
}

TEST_CASE("Krein sign check") {
  Rng rng(2);
  auto psd = random_pencil(rng, 5, 3, true);
  auto k = krein_sign_check(psd, SpectralPoint::off_axis(0.0, 0.7), 0.2);
  CHECK(k.rindex == 3);
  CHECK(k.agree);
  auto mixed = FinitePencil::make(random_hermitian(rng, 3), HermitianMatrix::diagonal({1, -1, 0}));
  auto m = krein_sign_check(mixed, SpectralPoint::off_axis(0.3, 0.2), -0.4);
  CHECK(m.rindex == 0);
  CHECK(m.agree);
  for (int trial = 0; trial < 50; ++trial) {
    auto p = random_pencil(rng, 2 + trial % 6, 1 + trial % 2);
    CHECK(krein_sign_check(p, SpectralPoint::off_axis(0.1, 0.05 + 0.02 * trial), 0.5).agree);
  }
}

TEST_CASE("three-level pencil: index one at the origin") {
  for (double eps : {0.5, 1.0}) {
    auto ir = resonance_index(three_level_example(eps), 0.0, 0.0);
    CHECK(ir.ind_splitting == 1);
    CHECK(ir.ind_rindex == 1);
    CHECK(ir.ind_signature == 1);
    CHECK(ir.consistency);
    CHECK(std::abs(ir.index()) <= ir.dim_upsilon1);
  }
}

TEST_CASE("four-level example with v11 = -3: order 4, index 0") {
  auto ir = resonance_index(four_level_example(-3.0), 0.0, 0.0);
  CHECK(ir.order_d == 4);
  CHECK(ir.index() == 0);
  CHECK(ir.consistency);
}

TEST_CASE("four-level example with v11 = -4: order 3, all routes agree") {
  auto ir = resonance_index(four_level_example(-4.0), 0.0, 0.0);
  CHECK(ir.order_d == 3);
  CHECK(ir.consistency);
  // Eigenvalue tracking fixes the sign: the eigenvalue through 0 crosses downward.
  CHECK(ir.index() == spectral_flow_oracle(four_level_example(-4.0), 0.0, -0.05, 0.05));
}

TEST_CASE("embedded rank-one model: index equals the sign of alpha") {
  for (double alpha : {1.0, -1.0}) {
    auto ir = resonance_index(scalar_embedded_example(alpha), 0.0, 0.0);
    CHECK(ir.index() == static_cast<int>(alpha));
    CHECK(ir.consistency);
  }
}

TEST_CASE("resonance matrix") {
  auto e = embedded_continuum_example(1, 0);
  auto rm = resonance_matrix(e, 0.0, 0.0);
  CHECK(rm.sig_minus_plus.rank() == 1);
  CHECK(rm.sig_minus_plus.sign() == (e.alpha > 0 ? 1 : -1));
  CHECK(rm.hermitian_residual < 1e-8);

  Rng rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    auto p = random_pencil(rng, 4, 2, true);
    auto pts = real_resonance_points(p, 0.1, -3.0, 3.0);
    for (double r : pts) {
      auto m = resonance_matrix(p, 0.1, r);
      CHECK(m.sig_minus_plus.n_minus == 0);
      CHECK(m.sig_minus_plus.sign() == m.sig_plus_minus.sign());
    }
  }
}

TEST_CASE("U-turn contributes zero") {
  auto p = u_turn(0.5);
  auto ir = resonance_index(p, 0.5, 0.0);
  CHECK(ir.index() == 0);
  CHECK(ir.N_plus == 1);
  CHECK(ir.N_minus == 1);
  CHECK(ir.dim_upsilon1 >= std::abs(ir.index()));
  CHECK(spectral_flow_oracle(p, 0.499, -1.0, 1.0) == 0);
  CHECK(spectral_flow_oracle(p, 0.5, -1.0, 1.0) == 0);
}

TEST_CASE("ssf counting") {
  auto p = FinitePencil::make(HermitianMatrix::diagonal({0.0}), HermitianMatrix::diagonal({1.0}));
  CHECK(ssf_counting(p, 0.5, 0.0, 1.0) == 1);
  CHECK(ssf_counting(p, 0.5, 0.3, 0.3) == 0);
  CHECK(spectral_flow_oracle(p, 0.5, 0.0, 1.0) == 1);
  CHECK_THROWS_AS(ssf_counting(p, 1.0, 0.0, 1.0), Error);
}

TEST_CASE("total resonance index") {
  auto none = FinitePencil::make(HermitianMatrix::diagonal({2.0, 3.0}), HermitianMatrix::identity(2));
  auto fr0 = total_resonance_index(none, 0.0, 0.0, 1.0);
  CHECK(fr0.total == 0);
  CHECK(fr0.per_point.empty());

  // eigenvalue lambda - 0.5 + s crosses lambda upward at s = 0.5
  auto up = FinitePencil::make(HermitianMatrix::diagonal({-0.5, 2.0}), HermitianMatrix::diagonal({1.0, 0.0}));
  auto fr1 = total_resonance_index(up, 0.0, 0.0, 1.0);
  CHECK(fr1.total == 1);
  CHECK(fr1.agreement);

  CHECK_THROWS_AS(total_resonance_index(up, 0.0, 0.5, 1.0), Error);

  Rng rng(66);
  for (int trial = 0; trial < 10; ++trial) {
    auto p = random_pencil(rng, 6, 1 + trial % 6);
    double lambda = -0.5 + 0.1 * trial;
    auto fr = total_resonance_index(p, lambda, 0.0, 1.0);
    CHECK(fr.total == ssf_counting(p, lambda, 0.0, 1.0));
    CHECK(fr.total == spectral_flow_oracle(p, lambda, 0.0, 1.0));
    int sum = 0;
    for (const auto& ir : fr.per_point) sum += ir.index();
    CHECK(sum == fr.total);
  }
}

TEST_CASE("index does not depend on the rigging") {
  Rng rng(12);
  for (int trial = 0; trial < 5; ++trial) {
    auto p = random_pencil(rng, 4, 2 + trial % 3);
    auto q = rerig(p, random_rigging(rng, 4));
    for (double r : real_resonance_points(p, 0.2, -2.0, 2.0))
      CHECK(resonance_index(p, 0.2, r).index() == resonance_index(q, 0.2, r).index());
  }
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numbers>

#include "resflow/builtins.hpp"
#include "resflow/embedded.hpp"
#include "resflow/index_flow.hpp"
#include "resflow/resonance.hpp"

using namespace resflow;
using std::numbers::pi;

namespace {

CVector eigen_direction(Eigen::Index dim) {
  CVector e = CVector::Zero(dim);
  e(dim - 1) = 1.0;
  return e;
}

}  // namespace

TEST_CASE("decoupled eigen-direction has order one") {
  CMatrix c = CMatrix::Identity(2, 2);
  auto base = ContinuumModel::make({{-1.0, 1.0, HermitianMatrix(c)}}, HermitianMatrix::diagonal({0.3, -0.2}));
  auto e = embed_eigenvalue(base, CVector::Zero(2), 1.0, 0.0, 0.0);
  auto d = embedded_diagnostics(e);
  CHECK(d.order_predicted == 1);
  for (auto a : d.a_plus) CHECK(std::abs(a) == 0.0);
  CHECK(point_structure(e, SpectralPoint::plus(0.0), 0.0).order_d == 1);
}

TEST_CASE("scalar base with alpha = 0") {
  auto d = embedded_diagnostics(scalar_embedded_example(0.0));
  CHECK(std::abs(d.u_hat_plus(0) - cplx(0, pi)) < 1e-14);
  CHECK(std::abs(d.a_plus[0] - cplx(0, pi)) < 1e-14);
  CHECK(std::abs(d.a_minus[0] - std::conj(d.a_plus[0])) < 1e-14);
  CHECK(d.order_predicted == 2);
  CHECK(d.regularizing);
}

TEST_CASE("predicted order matches the measured order") {
  for (int order = 1; order <= 4; ++order)
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      auto e = embedded_continuum_example(order, seed);
      auto d = embedded_diagnostics(e);
      CHECK(d.order_predicted == order);
      for (std::size_t j = 0; j < d.a_plus.size(); ++j) CHECK(std::abs(d.a_minus[j] - std::conj(d.a_plus[j])) < 1e-10);
      auto rec = point_structure(e, SpectralPoint::plus(0.0), 0.0);
      CHECK(rec.order_d == order);
      CHECK(rec.alg_mult_N == order);
      // the order-one space is the eigen-direction and the staircase grows by one
      REQUIRE(static_cast<int>(rec.upsilon_bases.size()) >= order);
      const CMatrix& u1 = rec.upsilon_bases[0];
      CHECK(u1.cols() == 1);
      CHECK(std::abs(std::abs(u1.col(0).dot(eigen_direction(e.dim()))) - 1.0) < 1e-8);
      for (int j = 1; j <= order; ++j) CHECK(rec.upsilon_bases[static_cast<std::size_t>(j - 1)].cols() == j);
    }
}

TEST_CASE("high order forces equal boundary vectors") {
  for (int order : {3, 4}) {
    auto d = embedded_diagnostics(embedded_continuum_example(order, 2));
    CHECK((d.u_hat_plus - d.u_hat_minus).norm() < 1e-7);
  }
}

TEST_CASE("block formula assembly") {
  auto e = embedded_continuum_example(2, 5);
  Rng rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto m = e.base.dim();
  for (int k = 0; k < 20; ++k) {
    auto z = SpectralPoint::off_axis(0.5 * u(rng), 0.1 + std::abs(u(rng)));
    cplx s(u(rng), 0.2 * u(rng));
    CMatrix th = continuum_T(e.base, z, s, e.r_lambda);
    CVector uu = th * e.psi_hat;
    Eigen::RowVectorXcd row = e.psi_hat.adjoint() * th;
    cplx ds = s - e.r_lambda;
    cplx dd = 1.0 / (cplx(e.lambda) - z.z() + ds * e.alpha - ds * ds * e.psi_hat.dot(uu));
    CMatrix want(m + 1, m + 1);
    want.topLeftCorner(m, m) = th + ds * ds * dd * uu * row;
    want.topRightCorner(m, 1) = -ds * dd * uu;
    want.bottomLeftCorner(1, m) = -ds * dd * row;
    want(m, m) = dd;
    CHECK((model_T(e, z, s) - want).norm() <= 1e-9 * want.norm());
    CHECK(std::abs(embedded_diagnostics(e).D_function(z, s) - dd) <= 1e-9 * std::abs(dd));
  }
}

TEST_CASE("closed-form idempotents agree with contour integrals") {
  for (int order = 1; order <= 3; ++order)
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      auto e = embedded_continuum_example(order, seed);
      auto cf = closed_form_idempotents(e, order);
      auto plus = point_structure(e, SpectralPoint::plus(0.0), 0.0);
      auto minus = point_structure(e, SpectralPoint::minus(0.0), 0.0);
      CHECK((cf.P_plus - plus.P).norm() < 1e-6);
      CHECK((cf.P_minus - minus.P).norm() < 1e-6);
      CHECK((cf.nilA_plus - plus.nilA).norm() < 1e-6);
      CHECK((cf.nilA_minus - minus.nilA).norm() < 1e-6);
    }
  CHECK_THROWS_AS(closed_form_idempotents(embedded_continuum_example(2, 0), 1), Error);
}

TEST_CASE("order-one closed form") {
  auto e = embedded_continuum_example(1, 1);
  auto cf = closed_form_idempotents(e, 1);
  const auto m = e.base.dim();
  CHECK(std::abs(cf.P_plus.trace() - 1.0) < 1e-12);
  CHECK(std::abs(cf.P_plus(m, m) - 1.0) < 1e-12);
  Eigen::RowVectorXcd want = e.psi_hat.adjoint() / e.alpha;
  CHECK((cf.P_plus.block(m, 0, 1, m) - want).norm() < 1e-12);
  CHECK(cf.P_plus.topRows(m).norm() < 1e-12);
}

TEST_CASE("zero base coupling: quadratic root analysis") {
  auto pos = rank_one_index_analysis(scalar_embedded_example(1.0));
  CHECK(pos.index == 1);
  CHECK(pos.slope_ok);
  CHECK(std::abs(pos.slope - cplx(0, 1)) < 0.05);
  CHECK(pos.index_matches);

  auto neg = rank_one_index_analysis(scalar_embedded_example(-1.0));
  CHECK(neg.index == -1);
  CHECK(neg.slope_ok);
  CHECK(neg.index_matches);

  auto zero = rank_one_index_analysis(scalar_embedded_example(0.0));
  CHECK(zero.index == 0);
  CHECK(zero.n_plus == 1);
  CHECK(zero.n_minus == 1);
  CHECK(zero.opposite_half_planes);
  CHECK(zero.index_matches);

  CHECK_THROWS_AS(rank_one_index_analysis(embedded_continuum_example(2, 0)), Error);
}

TEST_CASE("constructed finite examples have the requested order") {
  for (int d = 1; d <= 5; ++d)
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      auto p = construct_finite_example(0.0, d, seed);
      CHECK(p.h0.size() <= d + 2);
      auto rec = point_structure(p, SpectralPoint::plus(0.0), 0.0);
      CHECK(rec.order_d == d);
    }
}

TEST_CASE("constructed examples: simple eigenvalue crosses for odd order, turns for even") {
  for (int d = 1; d <= 4; ++d) {
    auto p = construct_finite_example(0.0, d, 11);
    auto ir = resonance_index(p, 0.0, 0.0);
    CHECK(ir.consistency);
    if (d % 2 == 0) CHECK(ir.index() == 0);
    else CHECK(std::abs(ir.index()) == 1);
  }
  CHECK(construct_finite_example(0.0, 3, 7).h0.size() == construct_finite_example(0.0, 3, 7).h0.size());
  CHECK((construct_finite_example(0.0, 3, 7).v.matrix() - construct_finite_example(0.0, 3, 7).v.matrix()).norm() == 0.0);
  CHECK_THROWS_AS(construct_finite_example(0.0, 6, 0), Error);
}

TEST_CASE("argument validation") {
  CHECK_THROWS_AS(embedded_continuum_example(5, 0), Error);
  CHECK_THROWS_AS(closed_form_idempotents(embedded_continuum_example(4, 0), 4), Error);
}

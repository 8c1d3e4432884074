#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "resflow/boundary.hpp"
#include "resflow/builtins.hpp"
#include "resflow/embedded.hpp"
#include "resflow/index_flow.hpp"

using namespace resflow;

TEST_CASE("c coefficients of a top Jordan vector") {
  OperatorModel m = embedded_continuum_example(3, 0);
  auto bd = boundary_data(m, 0.0, 0.0);
  const CMatrix& top = bd.plus.upsilon_bases.back();
  const CMatrix& below = bd.plus.upsilon_bases[bd.plus.upsilon_bases.size() - 2];
  // a vector of maximal order: the part of Upsilon^d orthogonal to Upsilon^{d-1}
  CMatrix proj = top - below * (below.adjoint() * top);
  Eigen::JacobiSVD<CMatrix> svd(proj, Eigen::ComputeThinU);
  CVector u = svd.matrixU().col(0);
  auto c = c_coefficients(m, bd, u, +1);
  CHECK(c.order == 3);
  CHECK(c.c.size() == 2);
  CHECK(c.fit_residual < 1e-6);

  CVector e = CVector::Zero(model_dim(m));
  e(model_dim(m) - 1) = 1.0;
  auto c1 = c_coefficients(m, bd, e, +1);
  CHECK(c1.order == 1);
  CHECK(c1.c.empty());

  CVector outside = CVector::Zero(model_dim(m));
  outside(0) = 1.0;
  if ((bd.plus.P * outside - outside).norm() > 1e-3) CHECK_THROWS_AS(c_coefficients(m, bd, outside, +1), Error);
}

TEST_CASE("type I space") {
  Rng rng(4);
  auto p = random_pencil(rng, 4, 2);
  for (double r : real_resonance_points(p, 0.1, -3.0, 3.0)) {
    auto t = type_I_space(p, 0.1, r);
    auto bd = boundary_data(p, 0.1, r);
    // no essential spectrum: Im T vanishes and every resonance vector is of type I
    CHECK(t.basis.cols() == bd.plus.upsilon_bases.back().cols());
  }
  CHECK(type_I_space(embedded_continuum_example(1, 0), 0.0, 0.0).basis.cols() == 1);
  auto t4 = type_I_space(embedded_continuum_example(4, 0), 0.0, 0.0);
  CHECK(t4.basis.cols() == 2);
  CHECK(t4.nilA_invariant);
  CHECK(t4.chain_equality_residual < 1e-6);
  CHECK(type_I_space(embedded_continuum_example(2, 0), 0.0, 0.0).basis.cols() == 1);
}

TEST_CASE("classification of the embedded family") {
  auto c1 = classify_point(embedded_continuum_example(1, 0), 0.0, 0.0);
  CHECK(c1.type_I_point == TypeI::yes);
  CHECK(c1.property_S);
  CHECK(c1.property_P);
  CHECK(c1.N == 1);

  auto fail = classify_point(embedded_continuum_example(2, 0), 0.0, 0.0);
  CHECK_FALSE(fail.property_S);
  CHECK(fail.type_I_point == TypeI::no);

  auto nop = classify_point(decoupled_embedded_example(), 0.0, 0.0);
  CHECK(nop.property_S);
  CHECK_FALSE(nop.property_P);
  CHECK(nop.type_I_point == TypeI::no);

  for (int order = 2; order <= 4; ++order) {
    auto c = classify_point(embedded_continuum_example(order, 1), 0.0, 0.0);
    CHECK(c.N == order);
    CHECK(c.pp_spectrum_ok);
    CHECK(c.property_M);
    CHECK(c.outside_essential == false);
    // type I implies both S and P
    if (c.type_I_point == TypeI::yes) CHECK((c.property_S && c.property_P));
    if (c.property_S) CHECK(c.S_consequence_residual < 1e-6);
  }
}

TEST_CASE("classification outside the essential spectrum") {
  auto c = classify_point(three_level_example(0.5), 0.0, 0.0);
  CHECK(c.outside_essential);
  CHECK(c.type_I_point == TypeI::yes);
  CHECK(c.dim_type_I_space == c.N);
}

TEST_CASE("depth of Jordan vectors") {
  auto d1 = depth_and_L(embedded_continuum_example(1, 0), 0.0, 0.0);
  REQUIRE(d1.table.size() == 1);
  CHECK(d1.table[0].depth == 0);
  CHECK(d1.clLw_basis.cols() == 0);

  auto d4 = depth_and_L(embedded_continuum_example(4, 0), 0.0, 0.0);
  REQUIRE(d4.table.size() == 4);
  std::vector<int> depths;
  for (const auto& t : d4.table) depths.push_back(t.depth);
  CHECK(depths == std::vector<int>{3, 2, 1, 0});
  CHECK(d4.clLw_basis.cols() == 2);
  CHECK(d4.L_basis.cols() == 2);
  CHECK(d4.orthogonality_residual < 1e-7);
  CHECK(d4.geom_mult == 1);
  CHECK(2 * d4.clLw_basis.cols() + 1 >= d4.N);

  auto d3 = depth_and_L(embedded_continuum_example(3, 0), 0.0, 0.0);
  std::vector<int> depths3;
  for (const auto& t : d3.table) depths3.push_back(t.depth);
  CHECK(depths3 == std::vector<int>{2, 1, 0});
}

TEST_CASE("depth of a constructed pencil chain") {
  for (int d = 1; d <= 4; ++d) {
    auto p = construct_finite_example(0.0, d, 2);
    auto rep = depth_and_L(p, 0.0, 0.0);
    CHECK(rep.N == d);
    CHECK(static_cast<int>(rep.table.size()) == d);
    CHECK(rep.jordan_basis.cols() == d);
    CHECK(2 * rep.clLw_basis.cols() + rep.geom_mult >= rep.N);
    CHECK(rep.orthogonality_residual < 1e-6);
  }
}

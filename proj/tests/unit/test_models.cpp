#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numbers>

#include "resflow/builtins.hpp"
#include "resflow/embedded.hpp"
#include "resflow/models.hpp"

using namespace resflow;
using std::numbers::pi;

namespace {

ContinuumModel scalar_continuum(double j) {
  return ContinuumModel::make({{-1.0, 1.0, HermitianMatrix::identity(1)}}, HermitianMatrix::diagonal({j}));
}

std::vector<OperatorModel> sample_models() {
  Rng rng(17);
  std::vector<OperatorModel> out;
  out.push_back(random_pencil(rng, 4, 3));
  FinitePencil p = random_pencil(rng, 3, 2);
  out.push_back(rerig(p, random_rigging(rng, 3)));
  out.push_back(scalar_continuum(1.0));
  out.push_back(embedded_continuum_example(2, 1));
  return out;
}

}  // namespace

TEST_CASE("SpectralPoint conjugation") {
  auto z = SpectralPoint::off_axis(0.3, 0.2).conj();
  CHECK(z.y == doctest::Approx(-0.2));
  CHECK(SpectralPoint::plus(1.0).conj().side == Side::minus_i0);
  CHECK(SpectralPoint::minus(1.0).conj().side == Side::plus_i0);
  CHECK_THROWS_AS(SpectralPoint::off_axis(0.0, 0.0), Error);
}

TEST_CASE("finite_T closed forms") {
  auto p = FinitePencil::make(HermitianMatrix::diagonal({1, -1}), HermitianMatrix::zero(2));
  auto z = SpectralPoint::off_axis(0.0, 1.0);
  CMatrix t = finite_T(p, z, 0.37);
  CHECK(std::abs(t(0, 0) - 1.0 / cplx(1, -1)) < 1e-14);
  CHECK(std::abs(t(1, 1) - 1.0 / cplx(-1, -1)) < 1e-14);

  Rng rng(2);
  auto q = random_pencil(rng, 4, 4);
  auto w = SpectralPoint::off_axis(0.3, 0.1);
  CMatrix direct = (q.h0.matrix() + 0.7 * q.v.matrix() - cplx(0.3, 0.1) * CMatrix::Identity(4, 4)).inverse();
  CHECK((finite_T(q, w, 0.7) - direct).norm() < 1e-12 * direct.norm());
  CHECK((finite_T(q, w.conj(), 0.7) - finite_T(q, w, 0.7).adjoint()).norm() < 1e-12);
}

TEST_CASE("finite_T at a resonant boundary point") {
  auto p = FinitePencil::make(HermitianMatrix::diagonal({1, -1}), HermitianMatrix::identity(2));
  CHECK_THROWS_AS(finite_T(p, SpectralPoint::plus(0.0), -1.0), Error);
}

TEST_CASE("continuum base boundary values") {
  auto c = scalar_continuum(1.0);
  CHECK(std::abs(continuum_base_T(c, SpectralPoint::plus(0.0))(0, 0) - cplx(0, pi)) < 1e-14);
  CHECK(std::abs(continuum_base_T(c, SpectralPoint::minus(0.0))(0, 0) - cplx(0, -pi)) < 1e-14);
  // off the band the value is the real integral of 1/(x - 2) over [-1, 1]
  double outside = continuum_base_T(c, SpectralPoint::plus(2.0))(0, 0).real();
  double quad = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    double x = -1.0 + (i + 0.5) * 2.0 / n;
    quad += 2.0 / n / (x - 2.0);
  }
  CHECK(outside == doctest::Approx(std::log(1.0 / 3.0)).epsilon(1e-12));
  CHECK(outside == doctest::Approx(quad).epsilon(1e-7));
  CHECK_THROWS_AS(continuum_base_T(c, SpectralPoint::plus(1.0)), Error);
}

TEST_CASE("continuum coupling closed form") {
  auto c = scalar_continuum(1.0);
  for (double s : {-0.4, 0.0, 0.3, 1.7}) {
    cplx want = cplx(0, pi) / (1.0 + s * cplx(0, pi));
    CHECK(std::abs(model_T(c, SpectralPoint::plus(0.0), s)(0, 0) - want) < 1e-13);
  }
}

TEST_CASE("finite model_T through the resolvent identity matches the direct solve") {
  Rng rng(8);
  auto p = random_pencil(rng, 5, 3);
  auto z = SpectralPoint::off_axis(-0.2, 0.4);
  CMatrix t0 = finite_T(p, z, 0.0);
  const double s = 0.9;
  CMatrix via = (CMatrix::Identity(5, 5) + s * t0 * p.j.matrix()).inverse() * t0;
  CHECK((via - model_T(p, z, s)).norm() < 1e-9 * via.norm());
}

TEST_CASE("operator families: identities on every model class") {
  Rng rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const auto& m : sample_models()) {
    for (int k = 0; k < 5; ++k) {
      auto z = SpectralPoint::off_axis(0.5 * u(rng), 0.2 + 0.5 * std::abs(u(rng)));
      cplx r = u(rng), s = u(rng);
      CMatrix ar = op_A_only(m, z, r), as = op_A_only(m, z, s);
      double scale = std::max({norm2(ar), norm2(as), 1.0});
      CHECK((ar - as - (s - r) * ar * as).norm() <= 1e-9 * scale * scale);
      CHECK((ar * as - as * ar).norm() <= 1e-9 * scale * scale);
      auto pair = op_A(m, z, s);
      CHECK((pair.a.adjoint() - op_A(m, z.conj(), s).b).norm() <= 1e-10 * scale);
      CHECK((model_T(m, z.conj(), s) - model_T(m, z, s).adjoint()).norm() <= 1e-10 * scale);
    }
  }
}

TEST_CASE("boundary positivity of Im T") {
  for (const auto& m : sample_models()) {
    if (std::holds_alternative<FinitePencil>(m)) continue;
    double s = choose_probe(m, SpectralPoint::plus(0.0));
    CMatrix im = im_T(m, SpectralPoint::plus(0.0), s);
    auto e = eig_hermitian(HermitianMatrix(im, 1e-8));
    CHECK(e.values.minCoeff() >= -1e-8 * std::max(1.0, e.values.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("sign-definite coupling keeps eigenvalues of A in the upper half-plane") {
  Rng rng(12);
  for (int k = 0; k < 20; ++k) {
    auto p = random_pencil(rng, 5, 1 + k % 5, true);
    auto z = SpectralPoint::off_axis(0.1 * (k % 7) - 0.3, 0.3);
    CMatrix a = op_A_only(p, z, 0.4);
    for (cplx e : eigenvalues(a))
      if (std::abs(e) > 1e-8 * norm2(a)) CHECK(e.imag() > 0);
  }
}

TEST_CASE("J = 0 gives vanishing families") {
  auto c = scalar_continuum(0.0);
  auto pair = op_A(c, SpectralPoint::off_axis(0.1, 0.2), 0.5);
  CHECK(pair.a.norm() == 0.0);
  CHECK(pair.b.norm() == 0.0);
}

TEST_CASE("coupling at the base value returns the base resolvent") {
  auto c = scalar_continuum(1.0);
  auto z = SpectralPoint::off_axis(0.2, 0.3);
  CHECK((continuum_T(c, z, 0.0) - continuum_base_T(c, z)).norm() < 1e-15);
  auto e = embedded_continuum_example(1, 2, 0.4);
  CMatrix t = model_T(e, z, 0.4);
  CHECK(t.allFinite());
}

TEST_CASE("product identity over distinct couplings") {
  Rng rng(44);
  auto p = random_pencil(rng, 4, 3);
  auto z = SpectralPoint::off_axis(0.1, 0.3);
  const std::vector<cplx> s = {0.2, -0.5, 0.9, cplx(0.1, 0.4)};
  const cplx r(0.35, -0.2);
  const auto n = p.h0.size();
  for (std::size_t k = 1; k <= s.size(); ++k) {
    CMatrix prod = CMatrix::Identity(n, n), sum = CMatrix::Zero(n, n);
    for (std::size_t j = 0; j < k; ++j) {
      CMatrix fac = CMatrix::Identity(n, n) + (r - s[j]) * op_A_only(p, z, s[j]);
      prod = prod * fac;
      cplx w = std::pow(s[j] - r, static_cast<int>(k) - 1);
      for (std::size_t i = 0; i < k; ++i)
        if (i != j) w /= s[j] - s[i];
      sum += w * fac;
    }
    CHECK((prod - sum).norm() < 1e-8 * std::max(1.0, prod.norm()));
  }
}

TEST_CASE("embed_eigenvalue regularity") {
  CMatrix c = CMatrix::Zero(2, 2);
  c(0, 0) = 1.0;
  auto base = ContinuumModel::make({{-1.0, 1.0, HermitianMatrix(c)}}, HermitianMatrix::zero(2));
  CVector hidden = CVector::Zero(2);
  hidden(1) = 1.0;
  CHECK_THROWS_AS(embed_eigenvalue(base, hidden, 0.0, 0.0, 0.0), Error);
  CHECK_THROWS_AS(embed_eigenvalue(base, hidden, 1.0, 1.0, 0.0), Error);  // endpoint
  auto ok = embed_eigenvalue(base, CVector::Zero(2), 1.0, 0.0, 0.0);
  CHECK(ok.dim() == 3);
}

TEST_CASE("JSON-free construction validation") {
  CHECK_THROWS_AS(FinitePencil::make(HermitianMatrix::identity(2), HermitianMatrix::identity(3)), Error);
  CMatrix sing = CMatrix::Zero(2, 2);
  sing(0, 0) = 1.0;
  CHECK_THROWS_AS(FinitePencil::make_rigged(HermitianMatrix::identity(2), sing, HermitianMatrix::identity(2)), Error);
  CHECK_THROWS_AS(ContinuumModel::make({{0.0, 1.0, HermitianMatrix::identity(1)}, {0.5, 2.0, HermitianMatrix::identity(1)}},
                                       HermitianMatrix::identity(1)),
                  Error);
  CHECK_THROWS_AS(ContinuumModel::make({{0.0, 1.0, HermitianMatrix::diagonal({-1.0})}}, HermitianMatrix::identity(1)),
                  Error);
}

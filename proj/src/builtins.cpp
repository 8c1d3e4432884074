#include "resflow/builtins.hpp"

#include <cmath>

#include "resflow/boundary.hpp"
#include "resflow/embedded.hpp"
#include "resflow/index_flow.hpp"

namespace resflow {

FinitePencil three_level_example(double eps) {
  CMatrix v(3, 3);
  v << 1, 0, 1, 0, 1, 1, 1, 1, 0;
  return FinitePencil::make(HermitianMatrix::diagonal({eps, -eps, 0.0}), HermitianMatrix(v));
}

FinitePencil four_level_example(double v11) {
  CMatrix v(4, 4);
  v << v11, 0, 0, 1, 0, -1, 0, 1, 0, 0, 1, 1, 1, 1, 1, 0;
  return FinitePencil::make(HermitianMatrix::diagonal({1.0, 1.0, -0.5, 0.0}), HermitianMatrix(v));
}

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names = {
      "paper-14-1",           "paper-14-2-v2",        "paper-14-2-v3",       "paper-13-4-alpha-pos",
      "paper-13-4-alpha-neg", "paper-13-4-alpha-zero", "paper-13-3-2-S-fail", "paper-13-3-2-S-noP"};
  return names;
}

BuiltinExample builtin_example(const std::string& name) {
  BuiltinExample ex;
  ex.name = name;
  if (name == "paper-14-1") {
    ex.description = "H0 = diag(1/2, -1/2, 0), rank-3 coupling, resonance point 0 at lambda = 0";
    ex.model = three_level_example(0.5);
    ex.interval = std::make_pair(-0.5, 0.5);
    ex.expected.index = 1;
    ex.expected.total = 1;
  } else if (name == "paper-14-2-v2") {
    ex.description = "H0 = diag(1, 1, -1/2, 0), coupling with v11 = -4";
    ex.model = four_level_example(-4.0);
    ex.expected.index = 1;
    ex.expected.order = 3;
  } else if (name == "paper-14-2-v3") {
    ex.description = "H0 = diag(1, 1, -1/2, 0), coupling with v11 = -3";
    ex.model = four_level_example(-3.0);
    ex.expected.index = 0;
    ex.expected.order = 4;
  } else if (name == "paper-13-4-alpha-pos" || name == "paper-13-4-alpha-neg" || name == "paper-13-4-alpha-zero") {
    double alpha = name.ends_with("pos") ? 1.0 : name.ends_with("neg") ? -1.0 : 0.0;
    ex.description = "eigenvalue embedded in [-1, 1] with rank-one base coupling zero, alpha = " +
                     std::to_string(static_cast<int>(alpha));
    ex.model = scalar_embedded_example(alpha);
    ex.expected.index = static_cast<int>(alpha);
    if (alpha == 0.0) {
      ex.expected.n_plus = 1;
      ex.expected.n_minus = 1;
    }
  } else if (name == "paper-13-3-2-S-fail") {
    ex.description = "order-2 embedded eigenvalue with generic base coupling";
    ex.model = embedded_continuum_example(2, 0);
    ex.expected.order = 2;
    ex.expected.property_S = false;
  } else if (name == "paper-13-3-2-S-noP") {
    ex.description = "order-2 embedded eigenvalue with zero base coupling";
    ex.model = decoupled_embedded_example();
    ex.expected.order = 2;
    ex.expected.property_S = true;
    ex.expected.property_P = false;
  } else {
    throw Error(ErrorCode::UnknownExample, "no built-in example named '" + name + "'");
  }
  return ex;
}

namespace {

template <class T>
void compare(std::vector<std::string>& out, const char* what, const std::optional<T>& want,
             const std::optional<T>& got) {
  if (!want) return;
  if (!got) {
    out.push_back(std::string(what) + " not measured");
  } else if (*got != *want) {
    out.push_back(std::string(what) + ": expected " + std::to_string(*want) + ", measured " + std::to_string(*got));
  }
}

}  // namespace

ExampleCheck check_example(const BuiltinExample& ex) {
  ExampleCheck out;
  auto& m = out.measured;
  const auto& e = ex.expected;
  if (e.index || e.n_plus) {
    if (auto emb = std::get_if<EmbeddedModel>(&ex.model); emb && emb->base.j.matrix().isZero() && emb->psi_hat.size() == 1) {
      auto ro = rank_one_index_analysis(*emb);
      m.index = ro.index;
      m.n_plus = ro.n_plus;
      m.n_minus = ro.n_minus;
      if (!ro.index_matches) out.mismatches.push_back("rank-one root count disagrees with the model index");
      if (emb->alpha != 0.0 && !ro.slope_ok) out.mismatches.push_back("root slope differs from i/alpha by more than 5%");
    } else {
      auto ir = resonance_index(ex.model, ex.lambda, ex.r_lambda);
      m.index = ir.index();
      m.n_plus = ir.N_plus;
      m.n_minus = ir.N_minus;
      if (!ir.consistency) out.mismatches.push_back("index methods disagree");
    }
  }
  if (e.order) m.order = point_structure(ex.model, SpectralPoint::plus(ex.lambda), ex.r_lambda).order_d;
  if (e.total && ex.interval) {
    auto fr = total_resonance_index(ex.model, ex.lambda, ex.interval->first, ex.interval->second);
    m.total = fr.total;
    if (!fr.agreement) out.mismatches.push_back("flow oracles disagree with the total");
  }
  if (e.property_S || e.property_P) {
    auto cl = classify_point(ex.model, ex.lambda, ex.r_lambda);
    m.property_S = cl.property_S;
    m.property_P = cl.property_P;
  }
  compare(out.mismatches, "index", e.index, m.index);
  compare(out.mismatches, "order", e.order, m.order);
  compare(out.mismatches, "N+", e.n_plus, m.n_plus);
  compare(out.mismatches, "N-", e.n_minus, m.n_minus);
  compare(out.mismatches, "total", e.total, m.total);
  compare(out.mismatches, "property S", e.property_S, m.property_S);
  compare(out.mismatches, "property P", e.property_P, m.property_P);
  return out;
}

CMatrix random_unitary(Rng& rng, Eigen::Index n) {
  std::normal_distribution<double> g;
  CMatrix x(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) x(i, j) = cplx(g(rng), g(rng));
  Eigen::HouseholderQR<CMatrix> qr(x);
  CMatrix q = qr.householderQ();
  CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j) {
    double a = std::abs(r(j, j));
    if (a > 0) q.col(j) *= r(j, j) / a;
  }
  return q;
}

HermitianMatrix random_hermitian(Rng& rng, Eigen::Index n, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  CMatrix q = random_unitary(rng, n);
  RVector d(n);
  for (Eigen::Index i = 0; i < n; ++i) d(i) = u(rng);
  CMatrix h = q * d.cast<cplx>().asDiagonal() * q.adjoint();
  return HermitianMatrix((h + h.adjoint()) / 2.0);
}

HermitianMatrix random_coupling(Rng& rng, Eigen::Index n, Eigen::Index rank, bool psd) {
  std::uniform_real_distribution<double> mag(0.3, 1.5);
  std::bernoulli_distribution coin(0.5);
  CMatrix q = random_unitary(rng, n);
  RVector d = RVector::Zero(n);
  for (Eigen::Index i = 0; i < rank; ++i) d(i) = (psd || coin(rng) ? 1.0 : -1.0) * mag(rng);
  CMatrix v = q * d.cast<cplx>().asDiagonal() * q.adjoint();
  return HermitianMatrix((v + v.adjoint()) / 2.0);
}

FinitePencil random_pencil(Rng& rng, Eigen::Index n, Eigen::Index rank, bool psd) {
  auto h0 = random_hermitian(rng, n);
  return FinitePencil::make(h0, random_coupling(rng, n, rank, psd));
}

CMatrix random_rigging(Rng& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> s(0.5, 2.0);
  RVector d(n);
  for (Eigen::Index i = 0; i < n; ++i) d(i) = s(rng);
  return random_unitary(rng, n) * d.cast<cplx>().asDiagonal() * random_unitary(rng, n);
}

FinitePencil rerig(const FinitePencil& p, const CMatrix& f) {
  CMatrix finv = f.inverse();
  CMatrix j = finv.adjoint() * p.v.matrix() * finv;
  return FinitePencil::make_rigged(p.h0, f, HermitianMatrix((j + j.adjoint()) / 2.0, 1e300));
}

}  // namespace resflow

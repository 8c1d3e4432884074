#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "resflow/models.hpp"

namespace resflow {

struct Expectation {
  std::optional<int> index;
  std::optional<int> order;
  std::optional<int> n_plus;
  std::optional<int> n_minus;
  std::optional<int> total;  // over the example interval
  std::optional<bool> property_S;
  std::optional<bool> property_P;
};

struct BuiltinExample {
  std::string name;
  std::string description;
  OperatorModel model;
  double lambda = 0.0;
  double r_lambda = 0.0;
  std::optional<std::pair<double, double>> interval;
  Expectation expected;
};

const std::vector<std::string>& builtin_names();
BuiltinExample builtin_example(const std::string& name);

// H0 = diag(eps, -eps, 0), V = [[1,0,1],[0,1,1],[1,1,0]].
FinitePencil three_level_example(double eps);
// H0 = diag(1, 1, -1/2, 0); v11 = -4 gives an order-3 point at 0, v11 = -3 an order-4 point.
FinitePencil four_level_example(double v11);

struct Measured {
  std::optional<int> index, order, n_plus, n_minus, total;
  std::optional<bool> property_S, property_P;
};

struct ExampleCheck {
  Measured measured;
  std::vector<std::string> mismatches;
  bool ok() const { return mismatches.empty(); }
};

ExampleCheck check_example(const BuiltinExample& ex);

using Rng = std::mt19937_64;

CMatrix random_unitary(Rng& rng, Eigen::Index n);
// U diag(d) U* with d uniform in [-scale, scale].
HermitianMatrix random_hermitian(Rng& rng, Eigen::Index n, double scale = 1.0);
// V of the given rank with random nonzero eigenvalues of both signs (or positive when psd).
HermitianMatrix random_coupling(Rng& rng, Eigen::Index n, Eigen::Index rank, bool psd = false);
FinitePencil random_pencil(Rng& rng, Eigen::Index n, Eigen::Index rank, bool psd = false);
// Invertible F with condition number below 10.
CMatrix random_rigging(Rng& rng, Eigen::Index n);
// Same V, expressed as F* J F for a random F.
FinitePencil rerig(const FinitePencil& p, const CMatrix& f);

}  // namespace resflow

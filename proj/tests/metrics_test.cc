// Copyright 2026 The pditqkd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pditqkd/metrics.hpp"

#include <cmath>

#include "gtest/gtest.h"

using namespace pditqkd;

namespace {

const LabelList kAliceSide{kKeyA, kShieldA};

}  // namespace

TEST(LogNegativity, product_state_is_zero) {
  RngStream rng(1);
  const auto a = random_density_matrix(SystemLayout{{"A", 2}}, rng);
  const auto b = random_density_matrix(SystemLayout{{"B", 3}}, rng);
  const LabelList cut{"A"};
  ASSERT_NEAR(log_negativity(tensor(a, b), cut), 0.0, 1e-10);
}

TEST(LogNegativity, ebit_is_one) {
  const LabelList cut{kKeyA};
  ASSERT_NEAR(log_negativity(max_entangled(2), cut), 1.0, 1e-12);
}

TEST(LogNegativity, werner_reference_values) {
  const LabelList cut{kKeyA};
  const SystemLayout ab{{kKeyA, 2}, {kKeyB, 2}};
  const Matrix pp = max_entangled(2).matrix();
  auto werner = [&](double f) { return DensityMatrix(ab, f * pp + (1 - f) / 3 * (Matrix::Identity(4, 4) - pp)); };
  ASSERT_NEAR(log_negativity(werner(0.5), cut), 0.0, 1e-10);
  ASSERT_NEAR(log_negativity(werner(0.9), cut), 0.8479969065549502, 1e-12);
  ASSERT_NEAR(log_negativity(werner(0.99), cut), 0.9855004303048849, 1e-12);
}

TEST(LogNegativity, example_pbit_matches_bound) {
  const double frozen[] = {0.5849625007211557, 0.32192809488736185, 0.16992500144231207};
  const std::size_t dims[] = {2, 4, 8};
  for (int i = 0; i < 3; ++i) {
    const double ln = log_negativity(assemble_pdit(example_pbit(dims[i])), kAliceSide);
    ASSERT_NEAR(ln, frozen[i], 1e-10);
    ASSERT_LE(ln, ed_bound_example(dims[i]) + 1e-9);
  }
}

TEST(LogNegativity, additive_on_two_copies) {
  const auto g = assemble_pdit(example_pbit(2));
  const auto g2 = tensor(g, g.relabeled(kKeyA, "A2").relabeled(kKeyB, "B2").relabeled(kShieldA, "A'2")
                                .relabeled(kShieldB, "B'2"));
  const LabelList cut{kKeyA, kShieldA, "A2", "A'2"};
  ASSERT_NEAR(log_negativity(g2, cut), 2 * log_negativity(g, kAliceSide), 1e-9);
}

TEST(LogNegativity, rejects_invalid_cut) {
  const LabelList empty;
  const LabelList all{kKeyA, kKeyB};
  const LabelList bogus{"Q"};
  ASSERT_THROW(log_negativity(max_entangled(2), empty), std::invalid_argument);
  ASSERT_THROW(log_negativity(max_entangled(2), all), std::invalid_argument);
  ASSERT_THROW(log_negativity(max_entangled(2), bogus), std::invalid_argument);
}

TEST(LogNegativity, random_pdits_are_npt) {
  RngStream rng(2);
  for (int i = 0; i < 10; ++i) {
    const auto spec = random_pdit_spec(2, 2, 2, rng);
    ASSERT_GT(log_negativity(assemble_pdit(spec), kAliceSide), 1e-6);
  }
}

TEST(EdBoundExample, reference_values) {
  ASSERT_NEAR(ed_bound_example(2), 0.584962500721156, 1e-14);
  ASSERT_NEAR(ed_bound_example(16), 0.0874628412503394, 1e-14);
  for (std::size_t d = 2; d < 64; ++d) ASSERT_GT(ed_bound_example(d), ed_bound_example(d + 1));
  ASSERT_THROW(ed_bound_example(1), std::invalid_argument);
}

TEST(KeyRateBound, reference_values) {
  ASSERT_EQ(key_rate_bound(0, 0), 1.0);
  ASSERT_EQ(key_rate_bound(0.5, 0.1), 0.0);
  ASSERT_NEAR(key_rate_bound(0.05, 0.05), 0.427206085768088, 1e-12);
  ASSERT_THROW(key_rate_bound(0.6, 0), std::invalid_argument);
  ASSERT_THROW(key_rate_bound(0, -0.1), std::invalid_argument);
}

TEST(KeyRateBound, monotone) {
  for (int i = 0; i <= 10; ++i)
    for (int j = 0; j < 10; ++j)
      ASSERT_GE(key_rate_bound(0.05 * i, 0.05 * j), key_rate_bound(0.05 * i, 0.05 * (j + 1)) - 1e-15);
}

TEST(SecurityDiagnostic, ideal_is_zero) {
  ASSERT_NEAR(security_diagnostic(ccq_of(assemble_pdit(example_pbit(2)), 2)), 0.0, 1e-9);
  RngStream rng(3);
  const auto spec = random_pdit_spec(2, 2, 2, rng);
  ASSERT_NEAR(security_diagnostic(ccq_of(basic_pdit(spec), 2)), 0.0, 1e-9);
}

TEST(SecurityDiagnostic, key_known_to_eve) {
  CcqState c;
  c.key_dim = 2;
  c.probs = Eigen::MatrixXd::Zero(2, 2);
  c.probs(0, 0) = c.probs(1, 1) = 0.5;
  const SystemLayout e{{kEve, 2}};
  c.eve_states = {DensityMatrix::basis_state(e, std::vector<std::size_t>{0}), std::nullopt, std::nullopt,
                  DensityMatrix::basis_state(e, std::vector<std::size_t>{1})};
  ASSERT_GE(security_diagnostic(c), 0.5 - 1e-12);
}

TEST(SecurityDiagnostic, invariant_under_symbol_relabeling) {
  RngStream rng(4);
  const auto rho = random_density_matrix(SystemLayout{{kKeyA, 2}, {kKeyB, 2}, {kShieldA, 2}, {kShieldB, 1}}, rng);
  const Matrix flip = ops::kron(ops::pauli_x(), ops::pauli_x());
  const LabelList ab{kKeyA, kKeyB};
  const auto relabeled = apply_unitary(rho, UnitaryOp(SystemLayout{{kKeyA, 2}, {kKeyB, 2}}, flip), ab);
  ASSERT_NEAR(security_diagnostic(ccq_of(rho, 2)), security_diagnostic(ccq_of(relabeled, 2)), 1e-9);
}

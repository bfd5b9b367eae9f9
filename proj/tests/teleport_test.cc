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

#include "pditqkd/teleport.hpp"

#include <cmath>

#include "gtest/gtest.h"

using namespace pditqkd;

namespace {

DensityMatrix psi_minus() {
  Vector v = Vector::Zero(4);
  v(1) = 1 / std::sqrt(2.0);
  v(2) = -1 / std::sqrt(2.0);
  return DensityMatrix::pure(SystemLayout{{kKeyA, 2}, {kKeyB, 2}}, v);
}

}  // namespace

TEST(QubitsFor, powers) {
  ASSERT_EQ(qubits_for(1), 0u);
  ASSERT_EQ(qubits_for(2), 1u);
  ASSERT_EQ(qubits_for(3), 2u);
  ASSERT_EQ(qubits_for(4), 2u);
  ASSERT_EQ(qubits_for(16), 4u);
  ASSERT_EQ(qubits_for(17), 5u);
}

TEST(IsExactEbit, detects_noise) {
  ASSERT_TRUE(is_exact_ebit(max_entangled(2)));
  ASSERT_FALSE(is_exact_ebit(werner_state(0.999)));
}

TEST(EbitPool, take_and_exhaust) {
  EbitPool pool(std::vector<DensityMatrix>(3, max_entangled(2)));
  ASSERT_EQ(pool.take(2).size(), 2u);
  ASSERT_EQ(pool.consumed(), 2u);
  ASSERT_EQ(pool.available(), 1u);
  ASSERT_THROW(pool.take(2), std::runtime_error);
}

TEST(TeleportBranchKraus, branches_sum_to_trace_preserving) {
  const auto w = werner_state(0.8);
  Matrix sum = Matrix::Zero(2, 2);
  for (std::size_t m = 0; m < 4; ++m)
    for (const auto& k : teleport_branch_kraus(w, m)) sum += k.adjoint() * k;
  ASSERT_LE((sum - ops::identity(2)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(TeleportChannel, werner_resource_gives_werner_output) {
  const LabelList cut{kKeyB};
  for (double f : {1.0, 0.95, 0.8}) {
    const auto out = teleport_channel(werner_state(f), kKeyB).apply(max_entangled(2));
    ASSERT_LE(trace_distance(out, werner_state(f)), 1e-12) << f;
  }
}

TEST(TeleportSubsystem, exact_resource_is_identity) {
  RngStream rng(1);
  const auto g = assemble_pdit(example_pbit(3));
  const std::vector<DensityMatrix> ebits(2, max_entangled(2));
  std::vector<std::size_t> outcomes;
  const auto out = teleport_subsystem(g, kShieldB, ebits, rng, std::nullopt, &outcomes);
  ASSERT_LE(trace_distance(out, g), 1e-15);
  ASSERT_TRUE(outcomes.empty());
  ASSERT_EQ(rng.next_u64(), RngStream(1).next_u64());
}

TEST(TeleportSubsystem, destination_relabels) {
  RngStream rng(2);
  const std::vector<DensityMatrix> ebits(1, max_entangled(2));
  const auto out = teleport_subsystem(max_entangled(2), kKeyB, ebits, rng, std::string("B2"));
  ASSERT_TRUE(out.layout().contains("B2"));
  ASSERT_FALSE(out.layout().contains(kKeyB));
}

TEST(TeleportSubsystem, noisy_resource_fidelity_on_average) {
  RngStream rng(3);
  const std::vector<DensityMatrix> ebits(1, werner_state(0.9));
  Matrix avg = Matrix::Zero(4, 4);
  const int trials = 4000;
  std::vector<std::size_t> outcomes;
  for (int i = 0; i < trials; ++i) avg += teleport_subsystem(max_entangled(2), kKeyB, ebits, rng, {}, &outcomes).matrix();
  avg /= trials;
  ASSERT_EQ(outcomes.size(), std::size_t(trials));
  const double f = (max_entangled(2).matrix() * avg).trace().real();
  ASSERT_NEAR(f, 0.9, 0.03);
}

TEST(TeleportSubsystem, errors) {
  RngStream rng(4);
  const std::vector<DensityMatrix> none;
  ASSERT_THROW(teleport_subsystem(max_entangled(2), kKeyB, none, rng), std::invalid_argument);
  const std::vector<DensityMatrix> noisy(2, werner_state(0.9));
  ASSERT_THROW(teleport_subsystem(max_entangled(3), kKeyB, noisy, rng), std::invalid_argument);
}

TEST(LoChau, perfect_ebits_pass) {
  RngStream rng(5);
  const std::vector<DensityMatrix> c(100, max_entangled(2));
  const auto r = lo_chau_test(c, 50, 0.05, rng);
  ASSERT_TRUE(r.passed);
  ASSERT_EQ(r.errors, 0u);
  ASSERT_EQ(r.tested.size(), 50u);
  ASSERT_EQ(r.basis.size(), 50u);
}

TEST(LoChau, singlets_fail) {
  RngStream rng(6);
  const std::vector<DensityMatrix> c(100, psi_minus());
  const auto r = lo_chau_test(c, 50, 0.05, rng);
  ASSERT_FALSE(r.passed);
  ASSERT_EQ(r.errors, 50u);
}

TEST(LoChau, werner_failure_rate) {
  RngStream rng(7);
  const std::vector<DensityMatrix> c(20000, werner_state(0.85));
  const auto r = lo_chau_test(c, 20000, 0.05, rng);
  // Each basis fails with probability 2(1 - F)/3 = 0.1.
  ASSERT_NEAR(double(r.errors) / 20000, 0.1, 0.01);
  ASSERT_FALSE(r.passed);
}

TEST(LoChau, rejects_oversized_test) {
  RngStream rng(8);
  const std::vector<DensityMatrix> c(3, max_entangled(2));
  ASSERT_THROW(lo_chau_test(c, 4, 0.05, rng), std::invalid_argument);
}

TEST(PartialDistill, pool_excludes_tested) {
  RngStream rng(9);
  Transcript tr;
  const auto r = partial_distill(10, 30, 20, 0.05, 1.0, rng, &tr);
  ASSERT_TRUE(r.verified);
  ASSERT_EQ(r.pool.available(), 30u);
  ASSERT_EQ(tr.size(), 2u);
  ASSERT_THROW(partial_distill(0, 30, 20, 0.05, 1.0, rng), std::invalid_argument);
}

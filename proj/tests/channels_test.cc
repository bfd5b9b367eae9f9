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

#include "pditqkd/channels.hpp"

#include <cmath>

#include "gtest/gtest.h"
#include "pditqkd/metrics.hpp"

using namespace pditqkd;

namespace {

const LabelList kKeyLabels{kKeyA, kKeyB};

double key_error(const DensityMatrix& rho, const Matrix& parity) {
  return (1.0 - expectation(rho, parity, kKeyLabels)) / 2.0;
}

}  // namespace

TEST(NoiseChannel, rejects_incomplete_kraus_set) {
  const SystemLayout q{{"A", 2}};
  ASSERT_THROW(NoiseChannel(q, {0.5 * ops::identity(2)}), std::invalid_argument);
  ASSERT_THROW(NoiseChannel(q, {ops::identity(3)}), std::invalid_argument);
  ASSERT_NO_THROW(NoiseChannel(q, {ops::identity(2)}));
}

TEST(NoiseChannel, identity_leaves_state) {
  const auto g = assemble_pdit(example_pbit(2));
  const auto out = NoiseChannel::identity(SystemLayout{{kKeyA, 2}, {kKeyB, 2}}).apply(g);
  ASSERT_LE(trace_distance(out, g), 1e-14);
}

TEST(DepolarizeKey, reference_trace_distance_and_errors) {
  const auto g = assemble_pdit(example_pbit(2));
  const auto out = depolarize_key(0.1).apply(g);
  ASSERT_NEAR(trace_distance(out, g), 0.075, 1e-12);
  const Matrix xx = ops::kron(ops::pauli_x(), ops::pauli_x());
  const Matrix zz = ops::kron(ops::pauli_z(), ops::pauli_z());
  ASSERT_NEAR(key_error(out, zz), 0.05, 1e-12);
  // The twisted state already fails X parity a quarter of the time.
  ASSERT_NEAR(key_error(g, xx), 0.25, 1e-12);
  ASSERT_NEAR(key_error(out, xx), 0.9 * 0.25 + 0.1 * 0.5, 1e-12);
}

TEST(DepolarizeKey, full_strength_is_maximally_mixed_key) {
  const auto g = assemble_pdit(example_pbit(2));
  const auto out = depolarize_key(1.0).apply(g);
  const LabelList ab{kKeyA, kKeyB};
  ASSERT_LE((reduced_state(out, ab).matrix() - ops::identity(4) / 4.0).cwiseAbs().maxCoeff(), 1e-12);
  ASSERT_THROW(depolarize_key(-0.1), std::invalid_argument);
  ASSERT_THROW(depolarize_key(1.1), std::invalid_argument);
}

TEST(FlipChannels, bit_and_phase_rates) {
  const auto p = max_entangled(2);
  const Matrix xx = ops::kron(ops::pauli_x(), ops::pauli_x());
  const Matrix zz = ops::kron(ops::pauli_z(), ops::pauli_z());
  const auto bit = flip_channels(0.2, 0.0, kKeyB).apply(p);
  ASSERT_NEAR((1 - expectation(bit, zz, kKeyLabels)) / 2, 0.2, 1e-12);
  ASSERT_NEAR((1 - expectation(bit, xx, kKeyLabels)) / 2, 0.0, 1e-12);
  const auto phase = flip_channels(0.0, 0.3, kKeyB).apply(p);
  ASSERT_NEAR((1 - expectation(phase, zz, kKeyLabels)) / 2, 0.0, 1e-12);
  ASSERT_NEAR((1 - expectation(phase, xx, kKeyLabels)) / 2, 0.3, 1e-12);
  const auto both = flip_channels(0.1, 0.1, kKeyB).apply(p);
  ASSERT_NEAR((1 - expectation(both, zz, kKeyLabels)) / 2, 0.1, 1e-12);
  ASSERT_NEAR((1 - expectation(both, xx, kKeyLabels)) / 2, 0.1, 1e-12);
}

TEST(DepolarizeSubsystems, replaces_with_identity) {
  const auto p = max_entangled(2);
  const LabelList b{kKeyB};
  const auto out = depolarize_subsystems(p, b, 1.0);
  ASSERT_LE((out.matrix() - ops::identity(4) / 4.0).cwiseAbs().maxCoeff(), 1e-14);
  ASSERT_LE(trace_distance(depolarize_subsystems(p, b, 0.0), p), 1e-14);
}

TEST(WernerState, distance_fidelity_and_negativity) {
  const auto p = max_entangled(2);
  const LabelList a{kKeyA};
  for (double f : {0.5, 0.9, 0.99}) {
    const auto w = werner_state(f);
    ASSERT_NEAR(trace_distance(w, p), 1 - f, 1e-12);
    ASSERT_NEAR(expectation(w, p.matrix(), kKeyLabels), f, 1e-12);
  }
  ASSERT_NEAR(log_negativity(werner_state(0.9), a), 0.8479969065549502, 1e-12);
  ASSERT_THROW(werner_state(0.4), std::invalid_argument);
  ASSERT_THROW(werner_state(1.01), std::invalid_argument);
}

TEST(EbitSource, count_and_state) {
  RngStream rng(1);
  const auto e = ebit_source(0.95, 7, rng);
  ASSERT_EQ(e.size(), 7u);
  for (const auto& x : e) ASSERT_LE(trace_distance(x, werner_state(0.95)), 1e-15);
}

TEST(SourceMode, names_round_trip) {
  for (auto m : {SourceMode::honest, SourceMode::iid_attack, SourceMode::joint_attack})
    ASSERT_EQ(source_mode_from_string(to_string(m)), m);
  ASSERT_THROW(source_mode_from_string("coherent"), std::invalid_argument);
}

TEST(SourceSpec, validation) {
  SourceSpec s;
  s.target = example_pbit(2);
  ASSERT_NO_THROW(s.validate());
  s.mode = SourceMode::iid_attack;
  ASSERT_THROW(s.validate(), std::invalid_argument);
  s.channel = depolarize_key(0.1);
  ASSERT_NO_THROW(s.validate());
  s.ebit_fidelity = 0.3;
  ASSERT_THROW(s.validate(), std::invalid_argument);
  s.ebit_fidelity = 1.0;
  s.mode = SourceMode::joint_attack;
  ASSERT_THROW(s.validate(), std::invalid_argument);
}

TEST(PreparedSource, iid_copies_are_channel_output) {
  SourceSpec s;
  s.mode = SourceMode::iid_attack;
  s.target = example_pbit(2);
  s.channel = depolarize_key(0.2);
  const PreparedSource src(s);
  const auto expected = depolarize_key(0.2).apply(assemble_pdit(example_pbit(2)));
  ASSERT_LE(trace_distance(src.copy_state(), expected), 1e-12);
  const auto drawn = src.draw(5);
  ASSERT_EQ(drawn.count(), 5u);
  ASSERT_FALSE(drawn.joint.has_value());
}

TEST(JointProduct, labels_and_marginals) {
  const auto shield = DensityMatrix::maximally_mixed(SystemLayout{{kShieldA, 1}, {kShieldB, 1}});
  const auto c = tensor(max_entangled(2), shield);
  const std::vector<DensityMatrix> copies{c, c, c};
  const auto j = joint_product(copies);
  ASSERT_EQ(j.dim(), 64u);
  const auto l1 = CopyLabels::of_copy(1);
  ASSERT_TRUE(j.layout().contains(l1.a));
  ASSERT_EQ(joint_copy_count(j.layout(), untwisted_spec(2, shield)), 3u);
  const LabelList k1{l1.a, l1.b};
  ASSERT_LE((reduced_state(j, k1).matrix() - max_entangled(2).matrix()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(PreparedSource, joint_state_copy_marginal) {
  const auto shield = DensityMatrix::maximally_mixed(SystemLayout{{kShieldA, 1}, {kShieldB, 1}});
  const auto c = tensor(max_entangled(2), shield);
  const std::vector<DensityMatrix> copies{c, c, c, c};
  SourceSpec s;
  s.mode = SourceMode::joint_attack;
  s.target = untwisted_spec(2, shield);
  s.joint_state = joint_product(copies);
  const PreparedSource src(s);
  ASSERT_TRUE(src.is_joint());
  ASSERT_EQ(src.joint_copies(), 4u);
  ASSERT_LE(trace_distance(src.copy_state(), c), 1e-12);
  ASSERT_THROW(src.draw(5), std::invalid_argument);
}

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

#include "pditqkd/ecpa.hpp"

#include <cmath>

#include "gtest/gtest.h"
#include "pditqkd/metrics.hpp"

using namespace pditqkd;

namespace {

BitString random_bits(std::size_t n, RngStream& rng) {
  BitString b(n);
  for (auto& x : b) x = static_cast<std::uint8_t>(rng.below(2));
  return b;
}

BitString with_errors(const BitString& a, double p, RngStream& rng) {
  BitString b = a;
  for (auto& x : b)
    if (rng.bernoulli(p)) x ^= 1;
  return b;
}

BitString xor_of(const BitString& a, const BitString& b) {
  BitString c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] ^ b[i];
  return c;
}

}  // namespace

TEST(ToHex, packs_most_significant_first) {
  ASSERT_EQ(to_hex(BitString{1, 0, 1, 0, 0, 1, 0, 1}), "a5");
  ASSERT_EQ(to_hex(BitString{}), "");
  ASSERT_EQ(to_hex(BitString{1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 1}), "f01");
}

TEST(TwoWayRates, b_step_closed_form) {
  const PauliRates r{0.7, 0.1, 0.05, 0.15};
  const double keep = (r.i + r.z) * (r.i + r.z) + (r.x + r.y) * (r.x + r.y);
  ASSERT_NEAR(b_step_keep_probability(r), keep, 1e-14);
  const auto b = b_step_rates(r);
  ASSERT_NEAR(b.i, (r.i * r.i + r.z * r.z) / keep, 1e-14);
  ASSERT_NEAR(b.z, 2 * r.i * r.z / keep, 1e-14);
  ASSERT_NEAR(b.x, (r.x * r.x + r.y * r.y) / keep, 1e-14);
  ASSERT_NEAR(b.y, 2 * r.x * r.y / keep, 1e-14);
}

TEST(TwoWayRates, b_step_squares_bit_error) {
  const PauliRates r{0.9, 0.1, 0.0, 0.0};
  const auto b = b_step_rates(r);
  ASSERT_NEAR(b.bit(), 0.01 / (0.81 + 0.01), 1e-14);
  ASSERT_NEAR(b.phase(), 0.0, 1e-14);
}

TEST(TwoWayRates, p_step_pure_errors) {
  const double x = 0.1;
  const auto bit = p_step_rates(PauliRates{1 - x, x, 0, 0});
  ASSERT_NEAR(bit.bit(), 3 * x * (1 - x) * (1 - x) + x * x * x, 1e-14);
  ASSERT_NEAR(bit.phase(), 0.0, 1e-14);
  const double z = 0.1;
  const auto phase = p_step_rates(PauliRates{1 - z, 0, 0, z});
  ASSERT_NEAR(phase.phase(), 3 * z * z * (1 - z) + z * z * z, 1e-14);
  ASSERT_NEAR(phase.bit(), 0.0, 1e-14);
}

TEST(TwoWayRates, sums_stay_normalized) {
  PauliRates r{0.6, 0.15, 0.1, 0.15};
  for (int i = 0; i < 5; ++i) {
    r = (i % 2) ? p_step_rates(r) : b_step_rates(r);
    ASSERT_NEAR(r.i + r.x + r.y + r.z, 1.0, 1e-12);
  }
}

TEST(PlanTwoWay, no_steps_when_one_way_suffices) {
  const auto plan = plan_two_way(0.05, 0.05, 10);
  ASSERT_TRUE(plan.feasible);
  ASSERT_EQ(plan.steps, "");
  ASSERT_NEAR(plan.rate, 0.427206085768088, 1e-6);
}

TEST(PlanTwoWay, high_error_needs_steps) {
  const auto plan = plan_two_way(0.15, 0.15, 10);
  ASSERT_TRUE(plan.feasible);
  ASSERT_FALSE(plan.steps.empty());
  ASSERT_GT(plan.rate, 0.0);
  ASSERT_FALSE(plan_two_way(0.45, 0.45, 10).feasible);
}

TEST(ApplyBStep, keeps_agreeing_pairs) {
  BitString a{0, 1, 1, 1, 0, 0};
  BitString b{0, 1, 1, 0, 1, 1};
  BitString pa, pb;
  apply_b_step(a, b, &pa, &pb);
  ASSERT_EQ(pa, (BitString{1, 0, 0}));
  ASSERT_EQ(pb, (BitString{1, 1, 0}));
  ASSERT_EQ(a, (BitString{0, 0}));
  ASSERT_EQ(b, (BitString{0, 1}));
}

TEST(ApplyPStep, xors_triples) {
  BitString a{1, 1, 0, 1, 0, 0, 1};
  BitString b{1, 0, 0, 1, 1, 1, 0};
  apply_p_step(a, b);
  ASSERT_EQ(a, (BitString{0, 1}));
  ASSERT_EQ(b, (BitString{1, 1}));
}

TEST(ToeplitzHash, linear_and_deterministic) {
  RngStream rng(1);
  const ToeplitzHash h(42, 300, 70);
  const auto a = random_bits(300, rng), b = random_bits(300, rng);
  ASSERT_EQ(h.apply(xor_of(a, b)), xor_of(h.apply(a), h.apply(b)));
  ASSERT_EQ(h.apply(a), ToeplitzHash(42, 300, 70).apply(a));
  ASSERT_NE(h.apply(a), ToeplitzHash(43, 300, 70).apply(a));
  ASSERT_EQ(h.apply(BitString(300, 0)), BitString(70, 0));
  ASSERT_THROW(h.apply(BitString(299, 0)), std::invalid_argument);
}

TEST(ToeplitzHash, constant_diagonals) {
  const ToeplitzHash h(7, 20, 10);
  std::vector<BitString> cols;
  for (std::size_t j = 0; j < 20; ++j) {
    BitString e(20, 0);
    e[j] = 1;
    cols.push_back(h.apply(e));
  }
  for (std::size_t i = 1; i < 10; ++i)
    for (std::size_t j = 1; j < 20; ++j) ASSERT_EQ(cols[j][i], cols[j - 1][i - 1]);
}

TEST(SparseParityCheck, shape_and_linearity) {
  const auto H = SparseParityCheck::random(200, 1000, 3, 5);
  ASSERT_EQ(H.rows(), 200u);
  ASSERT_EQ(H.cols(), 1000u);
  RngStream rng(2);
  const auto a = random_bits(1000, rng), b = random_bits(1000, rng);
  ASSERT_EQ(H.syndrome(xor_of(a, b)), xor_of(H.syndrome(a), H.syndrome(b)));
}

TEST(SparseParityCheck, decodes_sparse_errors) {
  const std::size_t n = 4000;
  const double p = 0.03;
  const auto rows = static_cast<std::size_t>(std::ceil(1.25 * n * binary_entropy(p + 0.01)));
  const auto H = SparseParityCheck::random(rows, n, 3, 9);
  RngStream rng(3);
  int ok = 0;
  for (int t = 0; t < 20; ++t) {
    const auto e = with_errors(BitString(n, 0), p, rng);
    const auto d = H.decode(H.syndrome(e), p, 100);
    if (d && *d == e) ++ok;
  }
  ASSERT_GE(ok, 19);
}

TEST(EcPa, no_errors_keeps_all_but_safety) {
  RngStream src(4), rng(5);
  const auto a = random_bits(2000, src);
  const auto r = ec_pa(a, a, 0.0, 0.0, rng);
  ASSERT_FALSE(r.aborted);
  ASSERT_EQ(r.syndrome_bits, 0u);
  ASSERT_EQ(r.reconciled_len, 2000u);
  ASSERT_EQ(r.alice.size(), 2000u - 40u);
  ASSERT_EQ(r.alice, r.bob);
}

TEST(EcPa, corrects_five_percent) {
  RngStream src(6), rng(7);
  const std::size_t n = 10000;
  const auto a = random_bits(n, src);
  const auto b = with_errors(a, 0.05, src);
  Transcript tr;
  const auto r = ec_pa(a, b, 0.05, 0.05, rng, {}, &tr);
  ASSERT_FALSE(r.aborted) << r.abort_reason;
  ASSERT_EQ(r.alice, r.bob);
  const auto expected = static_cast<std::size_t>(std::floor(n * (1 - 2 * binary_entropy(0.05)))) - 40;
  ASSERT_EQ(r.alice.size(), expected);
  ASSERT_GT(tr.size(), 0u);
}

TEST(EcPa, output_depends_on_stream) {
  RngStream src(8);
  const auto a = random_bits(3000, src);
  RngStream r1(1), r2(1), r3(2);
  const auto x = ec_pa(a, a, 0.01, 0.01, r1), y = ec_pa(a, a, 0.01, 0.01, r2), z = ec_pa(a, a, 0.01, 0.01, r3);
  ASSERT_EQ(x.alice, y.alice);
  ASSERT_NE(x.alice, z.alice);
}

TEST(EcPa, hopeless_error_rate_aborts) {
  RngStream src(9), rng(10);
  const auto a = random_bits(2000, src);
  const auto r = ec_pa(a, with_errors(a, 0.45, src), 0.45, 0.45, rng);
  ASSERT_TRUE(r.aborted);
  ASSERT_TRUE(r.alice.empty());
}

TEST(EcPa, short_input_aborts) {
  RngStream rng(11);
  const auto r = ec_pa(BitString(30, 0), BitString(30, 0), 0.0, 0.0, rng);
  ASSERT_TRUE(r.aborted);
}

TEST(EcPa, rejects_bad_arguments) {
  RngStream rng(12);
  ASSERT_THROW(ec_pa(BitString(10, 0), BitString(11, 0), 0, 0, rng), std::invalid_argument);
  ASSERT_THROW(ec_pa(BitString(10, 0), BitString(10, 0), 0.5, 0, rng), std::invalid_argument);
  ASSERT_THROW(ec_pa(BitString(10, 0), BitString(10, 0), 0, -0.1, rng), std::invalid_argument);
}

TEST(EcPa, underestimated_error_rate_recovers_by_retrying) {
  RngStream src(13);
  const std::size_t n = 4000;
  const auto a = random_bits(n, src);
  const auto b = with_errors(a, 0.03, src);
  RngStream r1(14), r2(14);
  const auto retried = ec_pa(a, b, 0.01, 0.005, r1);
  ASSERT_FALSE(retried.aborted) << retried.abort_reason;
  ASSERT_EQ(retried.alice, retried.bob);
  EcPaParams single;
  single.reconcile_attempts = 1;
  const auto once = ec_pa(a, b, 0.01, 0.005, r2, single);
  ASSERT_TRUE(once.aborted);
  ASSERT_GT(retried.syndrome_bits, once.syndrome_bits);
}

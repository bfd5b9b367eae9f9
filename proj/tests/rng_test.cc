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

#include "pditqkd/rng.hpp"

#include <set>

#include "gtest/gtest.h"

using namespace pditqkd;

TEST(RngStream, same_seed_same_sequence) {
  RngStream a(5), b(5);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(RngStream, split_ignores_draw_position) {
  RngStream a(5), b(5);
  for (int i = 0; i < 17; ++i) a.next_u64();
  RngStream ca = a.split(3), cb = b.split(3);
  for (int i = 0; i < 10; ++i) ASSERT_EQ(ca.next_u64(), cb.next_u64());
  ASSERT_NE(a.split(3).seed(), a.split(4).seed());
}

TEST(RngStream, uniform_in_unit_interval) {
  RngStream r(1);
  double sum = 0;
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  ASSERT_NEAR(sum / 100000, 0.5, 0.005);
}

TEST(RngStream, below_is_in_range_and_covers) {
  RngStream r(2);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto v = r.below(7);
    ASSERT_LT(v, 7u);
    seen.insert(v);
  }
  ASSERT_EQ(seen.size(), 7u);
}

TEST(RngStream, sample_index_skips_zero_weights) {
  RngStream r(3);
  const std::vector<double> w{0.0, 0.5, 0.0, 0.5};
  for (int i = 0; i < 1000; ++i) {
    const auto k = r.sample_index(w);
    ASSERT_TRUE(k == 1 || k == 3);
  }
}

TEST(RngStream, choose_returns_distinct) {
  RngStream r(4);
  const auto picks = r.choose(50, 20);
  ASSERT_EQ(picks.size(), 20u);
  ASSERT_EQ(std::set<std::size_t>(picks.begin(), picks.end()).size(), 20u);
  for (auto p : picks) ASSERT_LT(p, 50u);
  ASSERT_EQ(r.choose(5, 5).size(), 5u);
}

TEST(RngStream, bernoulli_frequency) {
  RngStream r(6);
  int hits = 0;
  for (int i = 0; i < 100000; ++i) hits += r.bernoulli(0.3);
  ASSERT_NEAR(hits / 100000.0, 0.3, 0.005);
}

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

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace pditqkd {

/// Seeded random stream with indexed splitting.
///
/// All draws are defined in terms of the 64-bit outputs of std::mt19937_64,
/// whose sequence is fixed by the standard, so transcripts are reproducible
/// across standard libraries. The distribution helpers below are hand-rolled
/// for the same reason (std::uniform_real_distribution is not portable).
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  bool bernoulli(double p);

  /// Standard normal deviate (Box-Muller, no cached second value).
  double normal();

  /// Child stream that depends only on (seed, index), never on how many
  /// values have already been drawn from this stream.
  RngStream split(std::uint64_t index) const;

  /// Index drawn from a discrete distribution. Entries must be >= 0; they
  /// need not sum exactly to one. Zero-weight entries are never returned.
  std::size_t sample_index(std::span<const double> weights);

  /// `count` distinct indices drawn uniformly from [0, population), in draw
  /// order (partial Fisher-Yates).
  std::vector<std::size_t> choose(std::size_t population, std::size_t count);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace pditqkd

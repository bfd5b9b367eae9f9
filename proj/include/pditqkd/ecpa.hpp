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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pditqkd/rng.hpp"
#include "pditqkd/transcript.hpp"

namespace pditqkd {

/// One bit per entry, each 0 or 1.
using BitString = std::vector<std::uint8_t>;

/// Lowercase hex of the bits packed most-significant first, zero-padded to a
/// multiple of four bits.
std::string to_hex(std::span<const std::uint8_t> bits);

/// Distribution of the Pauli error on one key pair. Bit errors are X or Y,
/// phase errors Z or Y.
struct PauliRates {
  double i = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double bit() const { return x + y; }
  double phase() const { return z + y; }
};

/// Parity comparison of two pairs, keeping the first bit of agreeing pairs.
/// Rates conditioned on the pair being kept.
PauliRates b_step_rates(const PauliRates& r);
/// Probability that a pair survives a B-step.
double b_step_keep_probability(const PauliRates& r);
/// Three-bit phase code: bit error is the XOR of the three, phase error the
/// majority.
PauliRates p_step_rates(const PauliRates& r);

/// Sequence of two-way steps chosen for given error estimates, evaluated at
/// the worst admissible Y-error rate.
struct TwoWayPlan {
  std::string steps;  // 'B' / 'P' per round
  bool feasible = false;
  double e_x = 0.0;   // phase error after the steps (worst case)
  double e_z = 0.0;   // bit error after the steps
  double rate = 0.0;  // 1 - h(e_x) - h(e_z) (worst case)
};

TwoWayPlan plan_two_way(double e_x, double e_z, std::size_t round_cap, std::size_t grid_points = 21);

/// In-place B-step on both strings; returns the announced parities.
void apply_b_step(BitString& alice, BitString& bob, BitString* parities_alice = nullptr,
                  BitString* parities_bob = nullptr);
/// In-place P-step: each triple becomes its XOR.
void apply_p_step(BitString& alice, BitString& bob);

/// Binary Toeplitz matrix of shape out_len x in_len determined by a 64-bit seed.
class ToeplitzHash {
 public:
  ToeplitzHash(std::uint64_t seed, std::size_t in_len, std::size_t out_len);

  std::size_t in_len() const { return in_len_; }
  std::size_t out_len() const { return out_len_; }
  BitString apply(std::span<const std::uint8_t> x) const;

 private:
  std::size_t in_len_;
  std::size_t out_len_;
  std::vector<std::uint64_t> diagonal_;  // in_len + out_len - 1 bits
};

/// Sparse parity-check matrix with fixed column weight.
class SparseParityCheck {
 public:
  static SparseParityCheck random(std::size_t rows, std::size_t cols, std::size_t column_weight, std::uint64_t seed);

  std::size_t rows() const { return check_vars_.size(); }
  std::size_t cols() const { return var_checks_.size(); }

  BitString syndrome(std::span<const std::uint8_t> x) const;

  /// Sum-product decoding of the error pattern e with H e = s under iid
  /// flips of probability p. Empty when decoding does not converge.
  std::optional<BitString> decode(std::span<const std::uint8_t> s, double p, std::size_t max_iterations) const;

 private:
  std::vector<std::vector<std::uint32_t>> check_vars_;
  std::vector<std::vector<std::uint32_t>> var_checks_;
};

struct EcPaParams {
  std::size_t safety_bits = 40;
  std::size_t round_cap = 10;
  std::size_t hash_bits = 64;        // one-way verification tag, >= 2 * the 2^-32 failure budget
  double syndrome_overhead = 1.25;   // syndrome bits per bit of h(e)
  double design_margin = 0.01;       // added to the bit error rate when sizing syndromes
  std::size_t column_weight = 3;
  std::size_t bp_iterations = 100;
  std::size_t reconcile_attempts = 4;  // syndrome sizes tried before aborting
};

struct EcPaResult {
  bool aborted = false;
  std::string abort_reason;  // round_cap, too_short, decode, hash_mismatch, length
  BitString alice;
  BitString bob;
  std::string two_way_steps;
  std::size_t reconciled_len = 0;  // length entering privacy amplification
  std::size_t syndrome_bits = 0;
  double e_x_final = 0.0;
  double e_z_final = 0.0;
};

/// Two-way B/P steps until the one-way rate is positive, syndrome-based
/// one-way correction with hash verification (retried at increasing design
/// error rates up to reconcile_attempts times), then Toeplitz privacy
/// amplification to floor(l (1 - h(e_x') - h(e_z'))) - safety_bits bits.
EcPaResult ec_pa(const BitString& alice, const BitString& bob, double e_x, double e_z, RngStream& rng,
                 const EcPaParams& params = {}, Transcript* transcript = nullptr);

}  // namespace pditqkd

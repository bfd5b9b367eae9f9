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

#include <optional>
#include <string>
#include <vector>

#include "pditqkd/qcore.hpp"

namespace pditqkd {

// Subsystem labels of a single private state.
inline const std::string kKeyA = "A";
inline const std::string kKeyB = "B";
inline const std::string kShieldA = "A'";
inline const std::string kShieldB = "B'";
inline const std::string kEve = "E";

/// Labels of one copy's key part and shield. Single-copy states use the bare
/// labels; copies inside a joint state carry a "#i" suffix.
struct CopyLabels {
  std::string a = kKeyA;
  std::string b = kKeyB;
  std::string shield_a = kShieldA;
  std::string shield_b = kShieldB;

  static CopyLabels base() { return {}; }
  static CopyLabels of_copy(std::size_t index);

  LabelList key() const { return {a, b}; }
  LabelList shield() const { return {shield_a, shield_b}; }
  LabelList all() const { return {a, b, shield_a, shield_b}; }
};

/// Defining data of a private state: key dimension, shield dimensions, the
/// twisting unitaries U_0..U_{d-1} on A'B' and the shield state.
struct PditSpec {
  std::size_t key_dim = 2;
  std::size_t shield_dim_a = 1;
  std::size_t shield_dim_b = 1;
  std::vector<UnitaryOp> twist_unitaries;
  DensityMatrix shield;

  /// Throws std::invalid_argument naming the violated invariant.
  void validate() const;

  SystemLayout key_layout() const;
  SystemLayout shield_layout() const;
  SystemLayout layout() const;  // (A, B, A', B')
};

/// Alice/Bob outcome distribution with Eve's conditional states.
struct CcqState {
  std::size_t key_dim = 0;
  Eigen::MatrixXd probs;  // probs(i, j) = P(Alice i, Bob j)
  // Row-major over (i, j); empty where probs(i, j) <= kRankCutoff.
  std::vector<std::optional<DensityMatrix>> eve_states;

  const std::optional<DensityMatrix>& eve_state(std::size_t i, std::size_t j) const {
    return eve_states[i * key_dim + j];
  }
  /// sum_ij p_ij rho_E^{ij}.
  DensityMatrix eve_marginal() const;
};

/// Table of twisting unitaries indexed by (Alice key value, Bob key value).
using TwistTable = std::vector<std::vector<UnitaryOp>>;

DensityMatrix max_entangled(std::size_t d);

/// (1/d) sum_ij |ii><jj| (x) U_i rho U_j^dagger on (A, B, A', B').
DensityMatrix assemble_pdit(const PditSpec& spec);

/// U^(1) = sum_i |i><i|_B (x) U_i^dagger on (B, A', B').
UnitaryOp untwist_local(const PditSpec& spec);

/// U^(2) = sum_ij |ij><ij|_AB (x) U_ij^dagger on (A, B, A', B'). The diagonal
/// of `table` must match spec.twist_unitaries.
UnitaryOp untwist_global(const PditSpec& spec, const TwistTable& table);

/// Twist table with the spec's U_i on the diagonal and identity elsewhere.
TwistTable default_twist_table(const PditSpec& spec);

/// The untwisted form P+(d) (x) shield.
DensityMatrix basic_pdit(const PditSpec& spec);

/// Exact ccq state of a (A, B, A', B') state: purify, measure AB in the
/// computational basis on every branch, trace out the shield.
CcqState ccq_of(const DensityMatrix& state, std::size_t d);

bool is_ideal_ccq(const CcqState& ccq, double tol);

/// Pbit with shields C^d (x) C^d: U_0 = I, U_1 = SWAP, shield
/// p rho_s + (1-p) rho_a with p = (1 + 1/d) / 2.
PditSpec example_pbit(std::size_t shield_dim);

/// Weight p = (1 + 1/d) / 2 of the symmetric part in example_pbit(d).
double example_pbit_weight(std::size_t shield_dim);

/// Normalized projectors onto the symmetric / antisymmetric subspace of
/// C^d (x) C^d, on layout (A', B').
DensityMatrix symmetric_state(std::size_t d);
DensityMatrix antisymmetric_state(std::size_t d);

/// Haar-random twisting unitaries and a random full-rank shield.
PditSpec random_pdit_spec(std::size_t key_dim, std::size_t shield_dim_a, std::size_t shield_dim_b, RngStream& rng);

/// Spec with identity twisting (the basic pdit) and the given shield.
PditSpec untwisted_spec(std::size_t key_dim, DensityMatrix shield);

}  // namespace pditqkd

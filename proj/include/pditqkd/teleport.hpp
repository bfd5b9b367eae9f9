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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pditqkd/channels.hpp"
#include "pditqkd/qcore.hpp"
#include "pditqkd/transcript.hpp"

namespace pditqkd {

/// Number of qubits needed to carry a d-dimensional system: ceil(log2 d).
std::size_t qubits_for(std::size_t dim);

/// True when the two-qubit state equals P+(2) entrywise within 1e-14.
bool is_exact_ebit(const DensityMatrix& ebit);

/// Distilled ebits waiting to be spent on teleportation.
class EbitPool {
 public:
  EbitPool() = default;
  explicit EbitPool(std::vector<DensityMatrix> ebits);

  std::size_t available() const { return ebits_.size() - next_; }
  std::size_t consumed() const { return next_; }

  /// Removes and returns the next `count` ebits; throws std::runtime_error
  /// when fewer are available.
  std::vector<DensityMatrix> take(std::size_t count);

 private:
  std::vector<DensityMatrix> ebits_;
  std::size_t next_ = 0;
};

/// Kraus operators of one Bell-measurement branch of qubit teleportation over
/// the two-qubit resource, with the Pauli correction X^m2 Z^m1 applied.
/// Index: outcome = 2 * m1 + m2. Summing all four branches gives a channel.
std::vector<Matrix> teleport_branch_kraus(const DensityMatrix& resource, std::size_t outcome);

/// Average teleportation channel over all Bell outcomes, on a qubit labeled
/// `target_label`.
NoiseChannel teleport_channel(const DensityMatrix& resource, const std::string& target_label);

/// Teleports subsystem `label` of rho qubit by qubit, consuming
/// qubits_for(dim) resource ebits. Exact resources reduce to the identity map
/// (optionally relabeling to `destination`) and draw nothing from `rng`.
/// Noisy resources run the Bell measurement, sample its outcomes from `rng`,
/// and apply the Pauli corrections; this needs a power-of-two dimension.
/// Bell outcomes are appended to `bell_outcomes` when it is non-null.
DensityMatrix teleport_subsystem(const DensityMatrix& rho, const std::string& label,
                                 std::span<const DensityMatrix> resource, RngStream& rng,
                                 std::optional<std::string> destination = std::nullopt,
                                 std::vector<std::size_t>* bell_outcomes = nullptr);

/// Outcome of Bell-parity testing of candidate ebits.
struct LoChauReport {
  std::vector<std::size_t> tested;  // candidate indices, in test order
  std::vector<char> basis;          // 'X' or 'Z' per test
  std::vector<bool> failed;         // parity -1 observed
  std::size_t errors = 0;
  bool passed = false;
};

/// Tests t random candidates: measures X(x)X or Z(x)Z (chosen uniformly) and
/// passes iff the fraction of -1 parities is at most epsilon / 2.
LoChauReport lo_chau_test(std::span<const DensityMatrix> candidates, std::size_t t, double epsilon, RngStream& rng);

bool lo_chau_verify(std::span<const DensityMatrix> candidates, std::size_t t, double epsilon, RngStream& rng);

/// Candidate ebits produced by partial distillation and the verdict on them.
struct DistillResult {
  EbitPool pool;              // untested candidates
  LoChauReport verification;
  bool verified = false;
};

/// Distillation model: k source copies yield `ebits_needed + t` candidates,
/// exact when fidelity == 1 and Werner states of that fidelity otherwise;
/// t of them are then spent on verification.
DistillResult partial_distill(std::size_t k, std::size_t ebits_needed, std::size_t t, double epsilon,
                              double fidelity, RngStream& rng, Transcript* transcript = nullptr);

}  // namespace pditqkd

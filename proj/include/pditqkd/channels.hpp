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

#include "pditqkd/pdit.hpp"
#include "pditqkd/qcore.hpp"

namespace pditqkd {

/// Completely positive trace-preserving map given by Kraus operators on a
/// fixed set of labeled subsystems.
class NoiseChannel {
 public:
  /// Validates sum_k K_k^dagger K_k = I within 1e-10.
  NoiseChannel(SystemLayout targets, std::vector<Matrix> kraus);

  static NoiseChannel identity(SystemLayout targets);

  const SystemLayout& targets() const { return targets_; }
  const std::vector<Matrix>& kraus() const { return kraus_; }

  /// Applies the channel to the subsystems named by targets().
  DensityMatrix apply(const DensityMatrix& rho) const;
  /// Applies the channel to `labels` (same dimensions as targets(), in order).
  DensityMatrix apply_to(const DensityMatrix& rho, std::span<const std::string> labels) const;

 private:
  SystemLayout targets_;
  std::vector<Matrix> kraus_;
};

/// With probability q replaces the key part AB by I/d^2; identity on shields.
NoiseChannel depolarize_key(double q, std::size_t key_dim = 2);

/// Independent sigma_x (probability p_bit) and sigma_z (probability p_phase)
/// on one qubit.
NoiseChannel flip_channels(double p_bit, double p_phase, const std::string& target_label);

/// (1 - q) rho + q Tr_S(rho) (x) I/D_S on the subsystems `labels`.
DensityMatrix depolarize_subsystems(const DensityMatrix& rho, std::span<const std::string> labels, double q);

/// Werner state F P+ + (1 - F)/3 (I - P+) on (A, B); F in [1/2, 1].
DensityMatrix werner_state(double fidelity);

/// `count` copies of the Werner state with the given fidelity to P+(2).
std::vector<DensityMatrix> ebit_source(double fidelity, std::size_t count, RngStream& rng);

enum class SourceMode { honest, iid_attack, joint_attack };

std::string to_string(SourceMode mode);
SourceMode source_mode_from_string(const std::string& name);

// Joint states over more copies than this are rejected.
inline constexpr std::size_t kMaxJointDim = 4096;

/// How Eve hands out the n requested copies.
struct SourceSpec {
  SourceMode mode = SourceMode::honest;
  PditSpec target;
  std::optional<NoiseChannel> channel;       // iid_attack only
  std::optional<DensityMatrix> joint_state;  // joint_attack only
  double ebit_fidelity = 1.0;                // quality of distilled ebits

  void validate() const;
};

/// Result of drawing n copies: per-copy states for honest/iid sources, one
/// joint state over n copies (labels suffixed "#i") for joint sources.
struct DrawnCopies {
  std::vector<DensityMatrix> copies;
  std::optional<DensityMatrix> joint;

  std::size_t count() const;
};

/// Source with the per-copy state assembled once, for repeated draws.
class PreparedSource {
 public:
  explicit PreparedSource(SourceSpec spec);

  const SourceSpec& spec() const { return spec_; }
  bool is_joint() const { return spec_.mode == SourceMode::joint_attack; }
  /// Per-copy state (honest / iid). For joint sources, the marginal of copy 0.
  const DensityMatrix& copy_state() const { return copy_state_; }
  /// Number of copies in the joint state (joint sources only).
  std::size_t joint_copies() const { return joint_copies_; }

  DrawnCopies draw(std::size_t n) const;

 private:
  SourceSpec spec_;
  DensityMatrix copy_state_;
  std::size_t joint_copies_ = 0;
};

DrawnCopies draw_copies(const SourceSpec& spec, std::size_t n, RngStream& rng);

/// Joint state of independent copies, each on (A, B, A', B'), relabeled with
/// copy suffixes.
DensityMatrix joint_product(std::span<const DensityMatrix> copies);

/// Number of copies a joint layout describes; throws unless the layout is
/// exactly n x (A, B, A', B') with the target's dimensions.
std::size_t joint_copy_count(const SystemLayout& layout, const PditSpec& target);

}  // namespace pditqkd

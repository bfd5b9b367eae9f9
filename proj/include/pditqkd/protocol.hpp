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
#include <string>
#include <utility>
#include <vector>

#include "pditqkd/channels.hpp"
#include "pditqkd/ecpa.hpp"
#include "pditqkd/pdit.hpp"
#include "pditqkd/teleport.hpp"
#include "pditqkd/transcript.hpp"

namespace pditqkd {

enum class UntwistMode { local, global };
enum class AbortStage { ebit_verify, error_rates, ec_pa };

std::string to_string(UntwistMode mode);
UntwistMode untwist_mode_from_string(const std::string& name);
std::string to_string(AbortStage stage);

/// Trace-norm sizes of the deviation of the noisy teleportation (eps1) and
/// untwisting (eps2) steps of phase estimation from their ideal versions.
struct OperationNoise {
  double teleport = 0.0;
  double untwist = 0.0;

  bool active() const { return teleport > 0.0 || untwist > 0.0; }
};

/// Parameters of one protocol run. k, m, t equal to zero select defaults:
/// m = ceil(c0 log2(d) log2(n)) with d the key dimension, t = m,
/// k = max(1, ceil(n / 100)).
struct ProtocolConfig {
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t m = 0;
  std::size_t t = 0;
  double epsilon = 0.05;
  double e_x_max = 0.11;
  double e_z_max = 0.11;
  UntwistMode untwist_mode = UntwistMode::local;
  OperationNoise noise;
  double sample_constant = 8.0;
  std::uint64_t seed = 0;
  EcPaParams ecpa;

  /// Copy with k, m, t filled in for the given key dimension.
  ProtocolConfig resolved(std::size_t key_dim) const;
  /// Throws std::invalid_argument naming the offending field. Call on a
  /// resolved config.
  void validate() const;
};

/// Exact single-copy reference values for a source.
struct SourceDiagnostics {
  double e_x_true = 0.0;
  double e_z_true = 0.0;
  double security_diagnostic = 0.0;
};

struct OutcomeDiagnostics {
  double security_diagnostic = 0.0;
  double e_x_true = 0.0;
  double e_z_true = 0.0;
  std::size_t ebits_consumed = 0;
};

struct ProtocolOutcome {
  bool aborted = false;
  std::optional<AbortStage> abort_stage;
  std::string abort_reason;
  double e_x_est = 0.0;
  double e_z_est = 0.0;
  std::size_t raw_len = 0;  // raw key length in bits
  BitString final_key_alice;
  BitString final_key_bob;
  double key_rate = 0.0;
  OutcomeDiagnostics diagnostics;

  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t m = 0;
  std::size_t t = 0;
  std::string two_way_steps;
  // Raw key digits before binarization. Kept for equivalence checks, not
  // serialized.
  std::vector<std::size_t> raw_key_alice;
  std::vector<std::size_t> raw_key_bob;
};

/// Stable-order JSON record; the keys are written as hex strings.
Json to_json(const ProtocolOutcome& outcome);

/// (e_x_true, e_z_true): exact probabilities of X(x)X = -1 after ideal
/// untwisting and of Z(x)Z = -1, on a single copy over (A, B, A', B').
std::pair<double, double> true_error_oracle(const DensityMatrix& state, const PditSpec& spec,
                                            UntwistMode mode = UntwistMode::local);

SourceDiagnostics diagnose_source(const PreparedSource& source, UntwistMode mode = UntwistMode::local);

/// Runs the six-step protocol. Diagnostics are computed unless supplied.
ProtocolOutcome run(const ProtocolConfig& config, const SourceSpec& source, Transcript* transcript = nullptr);
ProtocolOutcome run(const ProtocolConfig& config, const PreparedSource& source,
                    const SourceDiagnostics* diagnostics = nullptr, Transcript* transcript = nullptr);

/// Same as run, but the bit-estimation and raw-key systems are also
/// teleported and untwisted before their computational measurement.
ProtocolOutcome run_reference_m1(const ProtocolConfig& config, const SourceSpec& source,
                                 Transcript* transcript = nullptr);
ProtocolOutcome run_reference_m1(const ProtocolConfig& config, const PreparedSource& source,
                                 const SourceDiagnostics* diagnostics = nullptr, Transcript* transcript = nullptr);

/// Ebits per system for teleporting A' (and A in global mode) to Bob.
std::size_t ebits_per_system(const PditSpec& spec, UntwistMode mode);

// ---------------------------------------------------------------------------
// Single-step estimators on per-copy states (A, B, A', B').

/// Key-part outcomes of one system: (Alice digit, Bob digit).
using KeyOutcome = std::pair<std::size_t, std::size_t>;

/// Applies phase-estimation preparation to one copy: teleport A' (and A in
/// global mode) with the given ebits, untwist, and fully depolarize the
/// teleported / untwisted registers when the corresponding flag is set.
DensityMatrix prepare_for_phase_measurement(const DensityMatrix& copy, const PditSpec& spec, UntwistMode mode,
                                            std::span<const DensityMatrix> ebits, RngStream& rng,
                                            bool depolarize_teleported = false, bool depolarize_untwisted = false);

/// Exact probability that X(x)X = -1 (Fourier-basis disagreement for d > 2).
double phase_error_probability(const DensityMatrix& state);
/// Exact probability of computational-basis disagreement on AB.
double bit_error_probability(const DensityMatrix& state);

/// Flag probability r with r (1 - 1/D^2) = eps, where D is the total
/// dimension of the registers depolarized over `systems` systems of
/// register dimension `register_dim`.
double depolarizing_flag_probability(double eps, std::size_t register_dim, std::size_t systems);

/// Fraction of -1 outcomes of X(x)X on m independently prepared systems.
double phase_error_estimate(std::span<const DensityMatrix> systems, const PditSpec& spec, UntwistMode mode,
                            EbitPool& ebits, RngStream& rng);
/// Fraction of -1 outcomes of Z(x)Z; no teleportation or untwisting.
double bit_error_estimate(std::span<const DensityMatrix> systems, RngStream& rng);
/// Computational-basis key digits of each system.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> generate_raw_key(std::span<const DensityMatrix> systems,
                                                                               RngStream& rng);

/// Each digit as ceil(log2 d) bits, most significant first.
BitString binarize(std::span<const std::size_t> digits, std::size_t key_dim);

}  // namespace pditqkd

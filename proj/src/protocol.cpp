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

#include "pditqkd/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "pditqkd/metrics.hpp"

namespace pditqkd {

std::string to_string(UntwistMode mode) { return mode == UntwistMode::local ? "local" : "global"; }

UntwistMode untwist_mode_from_string(const std::string& name) {
  if (name == "local") return UntwistMode::local;
  if (name == "global") return UntwistMode::global;
  throw std::invalid_argument("unknown untwist mode '" + name + "'");
}

std::string to_string(AbortStage stage) {
  switch (stage) {
    case AbortStage::ebit_verify: return "ebit_verify";
    case AbortStage::error_rates: return "error_rates";
    case AbortStage::ec_pa: return "ec_pa";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Configuration

ProtocolConfig ProtocolConfig::resolved(std::size_t key_dim) const {
  ProtocolConfig c = *this;
  if (c.m == 0 && n > 1) {
    const double v = sample_constant * std::log2(static_cast<double>(key_dim)) * std::log2(static_cast<double>(n));
    c.m = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(v - 1e-9)));
  }
  if (c.m == 0) c.m = 1;
  if (c.t == 0) c.t = c.m;
  if (c.k == 0) c.k = std::max<std::size_t>(1, (n + 99) / 100);
  return c;
}

void ProtocolConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw std::invalid_argument("protocol." + field + ": " + why);
  };
  if (k < 1) fail("k", "must be at least 1");
  if (m < 1) fail("m", "must be at least 1");
  if (t < 1) fail("t", "must be at least 1");
  if (n < k + 2 * m + 1)
    fail("n", "n - k - 2m must be at least 1 (n=" + std::to_string(n) + ", k=" + std::to_string(k) +
                  ", m=" + std::to_string(m) + ")");
  if (!(epsilon > 0.0 && epsilon < 1.0)) fail("epsilon", "must lie in (0, 1)");
  if (!(e_x_max >= 0.0 && e_x_max < 0.5)) fail("e_x_max", "must lie in [0, 1/2)");
  if (!(e_z_max >= 0.0 && e_z_max < 0.5)) fail("e_z_max", "must lie in [0, 1/2)");
  if (!(noise.teleport >= 0.0 && noise.teleport < 1.0)) fail("teleport_noise", "eps1 must lie in [0, 1)");
  if (!(noise.untwist >= 0.0 && noise.untwist < 1.0)) fail("teleport_noise", "eps2 must lie in [0, 1)");
  if (!(sample_constant > 0.0)) fail("sample_constant", "must be positive");
  if (!(ecpa.syndrome_overhead >= 1.0)) fail("syndrome_overhead", "must be at least 1");
  if (ecpa.hash_bits < 1) fail("hash_bits", "must be at least 1");
  if (ecpa.reconcile_attempts < 1) fail("reconcile_attempts", "must be at least 1");
}

std::size_t ebits_per_system(const PditSpec& spec, UntwistMode mode) {
  std::size_t q = qubits_for(spec.shield_dim_a);
  if (mode == UntwistMode::global) q += qubits_for(spec.key_dim);
  return q;
}

// ---------------------------------------------------------------------------
// Single-copy measurement helpers

namespace {

UnitaryOp phase_rotation(std::size_t d, const CopyLabels& l) {
  const Matrix f = ops::fourier(d);
  return UnitaryOp(SystemLayout{{l.a, d}, {l.b, d}}, ops::kron(f, f.conjugate()));
}

/// Untwisting operator and the labels it acts on for a given copy.
struct Untwister {
  UnitaryOp op;
  UntwistMode mode;

  LabelList targets(const CopyLabels& l) const {
    if (mode == UntwistMode::local) return {l.b, l.shield_a, l.shield_b};
    return {l.a, l.b, l.shield_a, l.shield_b};
  }
  LabelList teleported(const CopyLabels& l) const {
    if (mode == UntwistMode::local) return {l.shield_a};
    return {l.shield_a, l.a};
  }
};

Untwister make_untwister(const PditSpec& spec, UntwistMode mode) {
  if (mode == UntwistMode::local) return {untwist_local(spec), mode};
  return {untwist_global(spec, default_twist_table(spec)), mode};
}

/// Outcome distribution over (a, b), index a * d + b, of the copy's key part
/// in the computational (fourier = false) or Fourier basis.
std::vector<double> key_distribution(const DensityMatrix& state, const CopyLabels& l, std::size_t d, bool fourier) {
  const LabelList key = l.key();
  DensityMatrix ab = reduced_state(state, key);
  if (fourier) ab = apply_unitary(ab, phase_rotation(d, l), key);
  return computational_probabilities(ab, key);
}

double disagreement(const std::vector<double>& probs, std::size_t d) {
  double p = 0.0;
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b)
      if (a != b) p += probs[a * d + b];
  return std::clamp(p, 0.0, 1.0);
}

/// Preparation applied to a copy before its key part is measured.
struct Preparation {
  const Untwister* untwister = nullptr;  // null: measure as is
  std::vector<DensityMatrix> ebits;      // teleport resources, A' first then A
  bool depolarize_teleported = false;
  bool depolarize_untwisted = false;
  RngStream* rng = nullptr;              // Bell outcomes of noisy teleports
  std::vector<std::size_t> bell_outcomes;

  bool exact_teleport() const {
    return std::all_of(ebits.begin(), ebits.end(), [](const DensityMatrix& e) { return is_exact_ebit(e); });
  }
};

DensityMatrix prepare(const DensityMatrix& state, const CopyLabels& l, Preparation& prep) {
  if (!prep.untwister) return state;
  DensityMatrix s = state;
  const auto moved = prep.untwister->teleported(l);
  std::size_t used = 0;
  for (const auto& label : moved) {
    const std::size_t q = qubits_for(s.layout().dim_of(label));
    if (used + q > prep.ebits.size())
      throw std::runtime_error("teleportation of " + label + " lacks ebits");
    std::span<const DensityMatrix> res(prep.ebits.data() + used, q);
    s = teleport_subsystem(s, label, res, *prep.rng, std::nullopt, &prep.bell_outcomes);
    used += q;
  }
  if (prep.depolarize_teleported) s = depolarize_subsystems(s, moved, 1.0);
  s = apply_unitary(s, prep.untwister->op, prep.untwister->targets(l));
  if (prep.depolarize_untwisted) s = depolarize_subsystems(s, prep.untwister->targets(l), 1.0);
  return s;
}

/// The n systems handed out by the source, measured one at a time.
class SystemBank {
 public:
  SystemBank(DrawnCopies drawn, std::size_t key_dim) : key_dim_(key_dim) {
    if (drawn.joint) {
      joint_ = std::move(drawn.joint);
    } else {
      copies_ = std::move(drawn.copies);
    }
  }

  bool joint() const { return joint_.has_value(); }

  CopyLabels labels(std::size_t i) const { return joint() ? CopyLabels::of_copy(i) : CopyLabels::base(); }

  void discard(std::size_t i) {
    if (!joint()) return;
    const auto drop = labels(i).all();
    const auto keep = joint_->layout().without(drop).labels();
    joint_ = partial_trace(*joint_, keep);
  }

  KeyOutcome measure(std::size_t i, Preparation& prep, bool fourier, RngStream& rng) {
    const CopyLabels l = labels(i);
    const std::size_t d = key_dim_;
    if (!joint()) {
      const DensityMatrix& copy = copies_[i];
      const bool cacheable = !prep.untwister || prep.exact_teleport();
      std::vector<double> probs;
      if (cacheable) {
        const CacheKey key{copy.storage_id(), prep.untwister != nullptr, prep.depolarize_teleported,
                           prep.depolarize_untwisted, fourier};
        auto it = cache_.find(key);
        if (it == cache_.end()) {
          Preparation local = prep;
          it = cache_.emplace(key, key_distribution(prepare(copy, l, local), l, d, fourier)).first;
        }
        probs = it->second;
      } else {
        probs = key_distribution(prepare(copy, l, prep), l, d, fourier);
      }
      const std::size_t idx = rng.sample_index(probs);
      return {idx / d, idx % d};
    }
    DensityMatrix s = prepare(*joint_, l, prep);
    const auto key = l.key();
    if (fourier) s = apply_unitary(s, phase_rotation(d, l), key);
    const Measurement meas = measure_computational(s, key, rng);
    const auto rest = meas.post_state.layout().without(l.shield()).labels();
    joint_ = partial_trace(meas.post_state, rest);
    return {meas.outcome[0], meas.outcome[1]};
  }

 private:
  using CacheKey = std::tuple<const void*, bool, bool, bool, bool>;

  std::size_t key_dim_;
  std::vector<DensityMatrix> copies_;
  std::optional<DensityMatrix> joint_;
  std::map<CacheKey, std::vector<double>> cache_;
};

std::vector<std::size_t> complement(std::size_t n, const std::vector<std::size_t>& taken) {
  std::vector<bool> used(n, false);
  for (auto i : taken) used[i] = true;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i)
    if (!used[i]) out.push_back(i);
  return out;
}

/// `count` positions drawn from `pool`, returned as sorted pool entries.
std::vector<std::size_t> sample_from(const std::vector<std::size_t>& pool, std::size_t count, RngStream& rng) {
  std::vector<std::size_t> out;
  for (auto p : rng.choose(pool.size(), count)) out.push_back(pool[p]);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> minus(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  std::vector<std::size_t> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

// Stream indices split from the run seed.
enum Stream : std::uint64_t {
  kDistillSubset = 0,
  kVerification = 1,
  kPhaseSubset = 2,
  kPhaseMeasure = 3,
  kBitSubset = 4,
  kBitMeasure = 5,
  kRawMeasure = 6,
  kEcPa = 7,
  kPhaseOps = 8,
  kReferenceOps = 9,
};

ProtocolOutcome execute(const ProtocolConfig& raw_config, const PreparedSource& source,
                        const SourceDiagnostics* supplied, Transcript* transcript, bool reference) {
  const PditSpec& spec = source.spec().target;
  const std::size_t d = spec.key_dim;
  const ProtocolConfig cfg = raw_config.resolved(d);
  cfg.validate();
  if (source.is_joint() && source.joint_copies() != cfg.n)
    throw std::invalid_argument("protocol.n = " + std::to_string(cfg.n) + " but the joint source holds " +
                                std::to_string(source.joint_copies()) + " copies");

  ProtocolOutcome out;
  out.n = cfg.n;
  out.k = cfg.k;
  out.m = cfg.m;
  out.t = cfg.t;
  const SourceDiagnostics diag = supplied ? *supplied : diagnose_source(source, cfg.untwist_mode);
  out.diagnostics.security_diagnostic = diag.security_diagnostic;
  out.diagnostics.e_x_true = diag.e_x_true;
  out.diagnostics.e_z_true = diag.e_z_true;

  const RngStream root(cfg.seed);
  auto stream = [&](Stream s) { return root.split(s); };
  RngStream distill_subset = stream(kDistillSubset), verification = stream(kVerification);
  RngStream phase_subset = stream(kPhaseSubset), phase_measure = stream(kPhaseMeasure);
  RngStream bit_subset = stream(kBitSubset), bit_measure = stream(kBitMeasure);
  RngStream raw_measure = stream(kRawMeasure), ecpa_rng = stream(kEcPa);
  RngStream phase_ops = stream(kPhaseOps), reference_ops = stream(kReferenceOps);

  note(transcript, "setup", "parameters",
       {{"n", cfg.n}, {"k", cfg.k}, {"m", cfg.m}, {"t", cfg.t}, {"epsilon", cfg.epsilon},
        {"untwist_mode", to_string(cfg.untwist_mode)}, {"reference", reference}});

  SystemBank bank(source.draw(cfg.n), d);
  const Untwister untwister = make_untwister(spec, cfg.untwist_mode);
  const std::size_t per_system = ebits_per_system(spec, cfg.untwist_mode);

  // Partial distillation and ebit verification.
  std::vector<std::size_t> distilled = sample_from([&] {
    std::vector<std::size_t> all(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) all[i] = i;
    return all;
  }(), cfg.k, distill_subset);
  note(transcript, "distill", "subset", {{"indices", distilled}});
  const std::size_t needed = per_system * (reference ? cfg.n - cfg.k : cfg.m);
  DistillResult distillation =
      partial_distill(cfg.k, needed, cfg.t, cfg.epsilon, source.spec().ebit_fidelity, verification, transcript);
  for (auto i : distilled) bank.discard(i);
  EbitPool& pool = distillation.pool;
  auto finish_accounting = [&] { out.diagnostics.ebits_consumed = cfg.t + pool.consumed(); };
  if (!distillation.verified) {
    out.aborted = true;
    out.abort_stage = AbortStage::ebit_verify;
    out.abort_reason = "lo_chau";
    finish_accounting();
    return out;
  }
  std::vector<std::size_t> remaining = complement(cfg.n, distilled);

  // Phase-error estimation on teleported and untwisted systems.
  const std::vector<std::size_t> phase_idx = sample_from(remaining, cfg.m, phase_subset);
  remaining = minus(remaining, phase_idx);
  bool flag_teleport = false, flag_untwist = false;
  if (cfg.noise.active()) {
    const auto moved = untwister.teleported(CopyLabels::base());
    std::size_t moved_dim = 1;
    for (const auto& label : moved) moved_dim *= spec.layout().dim_of(label);
    const std::size_t untwisted_dim = untwister.op.dim();
    flag_teleport = phase_ops.bernoulli(depolarizing_flag_probability(cfg.noise.teleport, moved_dim, cfg.m));
    flag_untwist = phase_ops.bernoulli(depolarizing_flag_probability(cfg.noise.untwist, untwisted_dim, cfg.m));
  }
  std::size_t phase_errors = 0;
  Json phase_outcomes = Json::array();
  for (auto i : phase_idx) {
    Preparation prep{&untwister, pool.take(per_system), flag_teleport, flag_untwist, &phase_ops, {}};
    const auto [a, b] = bank.measure(i, prep, true, phase_measure);
    if (a != b) ++phase_errors;
    Json rec = {{"index", i}, {"alice", a}, {"bob", b}};
    if (!prep.bell_outcomes.empty()) rec["bell"] = prep.bell_outcomes;
    phase_outcomes.push_back(std::move(rec));
  }
  out.e_x_est = static_cast<double>(phase_errors) / static_cast<double>(cfg.m);
  note(transcript, "phase_estimation", "outcomes", {{"results", std::move(phase_outcomes)}, {"e_x_est", out.e_x_est}});

  auto reference_prep = [&]() {
    if (!reference) return Preparation{};
    return Preparation{&untwister, pool.take(per_system), false, false, &reference_ops, {}};
  };

  // Bit-error estimation.
  const std::vector<std::size_t> bit_idx = sample_from(remaining, cfg.m, bit_subset);
  remaining = minus(remaining, bit_idx);
  std::size_t bit_errors = 0;
  Json bit_outcomes = Json::array();
  for (auto i : bit_idx) {
    Preparation prep = reference_prep();
    const auto [a, b] = bank.measure(i, prep, false, bit_measure);
    if (a != b) ++bit_errors;
    bit_outcomes.push_back({{"index", i}, {"alice", a}, {"bob", b}});
  }
  out.e_z_est = static_cast<double>(bit_errors) / static_cast<double>(cfg.m);
  note(transcript, "bit_estimation", "outcomes", {{"results", std::move(bit_outcomes)}, {"e_z_est", out.e_z_est}});

  if (out.e_x_est > cfg.e_x_max || out.e_z_est > cfg.e_z_max) {
    out.aborted = true;
    out.abort_stage = AbortStage::error_rates;
    out.abort_reason = out.e_x_est > cfg.e_x_max ? "e_x" : "e_z";
    note(transcript, "bit_estimation", "abort", {{"reason", out.abort_reason}});
    finish_accounting();
    return out;
  }

  // Raw key from the remaining systems.
  for (auto i : remaining) {
    Preparation prep = reference_prep();
    const auto [a, b] = bank.measure(i, prep, false, raw_measure);
    out.raw_key_alice.push_back(a);
    out.raw_key_bob.push_back(b);
  }
  note(transcript, "raw_key", "measured", {{"systems", remaining.size()}});
  finish_accounting();

  const BitString alice = binarize(out.raw_key_alice, d);
  const BitString bob = binarize(out.raw_key_bob, d);
  out.raw_len = alice.size();
  const EcPaResult ec = ec_pa(alice, bob, out.e_x_est, out.e_z_est, ecpa_rng, cfg.ecpa, transcript);
  out.two_way_steps = ec.two_way_steps;
  if (ec.aborted) {
    out.aborted = true;
    out.abort_stage = AbortStage::ec_pa;
    out.abort_reason = ec.abort_reason;
    return out;
  }
  out.final_key_alice = ec.alice;
  out.final_key_bob = ec.bob;
  out.key_rate = static_cast<double>(ec.alice.size()) / static_cast<double>(cfg.n);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

double phase_error_probability(const DensityMatrix& state) {
  const std::size_t d = state.layout().dim_of(kKeyA);
  return disagreement(key_distribution(state, CopyLabels::base(), d, true), d);
}

double bit_error_probability(const DensityMatrix& state) {
  const std::size_t d = state.layout().dim_of(kKeyA);
  return disagreement(key_distribution(state, CopyLabels::base(), d, false), d);
}

std::pair<double, double> true_error_oracle(const DensityMatrix& state, const PditSpec& spec, UntwistMode mode) {
  const Untwister u = make_untwister(spec, mode);
  const DensityMatrix untwisted = apply_unitary(state, u.op, u.targets(CopyLabels::base()));
  return {phase_error_probability(untwisted), bit_error_probability(state)};
}

SourceDiagnostics diagnose_source(const PreparedSource& source, UntwistMode mode) {
  const auto& spec = source.spec().target;
  SourceDiagnostics d;
  std::tie(d.e_x_true, d.e_z_true) = true_error_oracle(source.copy_state(), spec, mode);
  d.security_diagnostic = security_diagnostic(ccq_of(source.copy_state(), spec.key_dim));
  return d;
}

double depolarizing_flag_probability(double eps, std::size_t register_dim, std::size_t systems) {
  if (eps <= 0.0 || register_dim <= 1 || systems == 0) return 0.0;
  const double reach = -std::expm1(-2.0 * static_cast<double>(systems) * std::log(static_cast<double>(register_dim)));
  return std::min(1.0, eps / reach);
}

DensityMatrix prepare_for_phase_measurement(const DensityMatrix& copy, const PditSpec& spec, UntwistMode mode,
                                            std::span<const DensityMatrix> ebits, RngStream& rng,
                                            bool depolarize_teleported, bool depolarize_untwisted) {
  const Untwister u = make_untwister(spec, mode);
  Preparation prep{&u, std::vector<DensityMatrix>(ebits.begin(), ebits.end()), depolarize_teleported,
                   depolarize_untwisted, &rng, {}};
  return prepare(copy, CopyLabels::base(), prep);
}

double phase_error_estimate(std::span<const DensityMatrix> systems, const PditSpec& spec, UntwistMode mode,
                            EbitPool& ebits, RngStream& rng) {
  if (systems.empty()) throw std::invalid_argument("phase_error_estimate: no systems");
  const Untwister u = make_untwister(spec, mode);
  const std::size_t per = ebits_per_system(spec, mode);
  SystemBank bank(DrawnCopies{std::vector<DensityMatrix>(systems.begin(), systems.end()), std::nullopt}, spec.key_dim);
  RngStream ops_rng = rng.split(kPhaseOps);
  std::size_t errors = 0;
  for (std::size_t i = 0; i < systems.size(); ++i) {
    Preparation prep{&u, ebits.take(per), false, false, &ops_rng, {}};
    const auto [a, b] = bank.measure(i, prep, true, rng);
    if (a != b) ++errors;
  }
  return static_cast<double>(errors) / static_cast<double>(systems.size());
}

double bit_error_estimate(std::span<const DensityMatrix> systems, RngStream& rng) {
  if (systems.empty()) throw std::invalid_argument("bit_error_estimate: no systems");
  const auto [alice, bob] = generate_raw_key(systems, rng);
  std::size_t errors = 0;
  for (std::size_t i = 0; i < alice.size(); ++i)
    if (alice[i] != bob[i]) ++errors;
  return static_cast<double>(errors) / static_cast<double>(alice.size());
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> generate_raw_key(std::span<const DensityMatrix> systems,
                                                                               RngStream& rng) {
  if (systems.empty()) throw std::invalid_argument("generate_raw_key: no systems");
  const std::size_t d = systems[0].layout().dim_of(kKeyA);
  SystemBank bank(DrawnCopies{std::vector<DensityMatrix>(systems.begin(), systems.end()), std::nullopt}, d);
  std::pair<std::vector<std::size_t>, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < systems.size(); ++i) {
    Preparation none;
    const auto [a, b] = bank.measure(i, none, false, rng);
    out.first.push_back(a);
    out.second.push_back(b);
  }
  return out;
}

BitString binarize(std::span<const std::size_t> digits, std::size_t key_dim) {
  const std::size_t width = qubits_for(key_dim);
  BitString bits;
  bits.reserve(digits.size() * width);
  for (auto v : digits) {
    if (v >= key_dim) throw std::invalid_argument("binarize: digit out of range");
    for (std::size_t j = width; j-- > 0;) bits.push_back(static_cast<std::uint8_t>((v >> j) & 1u));
  }
  return bits;
}

Json to_json(const ProtocolOutcome& o) {
  Json j = Json::object();
  j["aborted"] = o.aborted;
  j["abort_stage"] = o.abort_stage ? Json(to_string(*o.abort_stage)) : Json(nullptr);
  j["abort_reason"] = o.abort_reason;
  j["e_x_est"] = o.e_x_est;
  j["e_z_est"] = o.e_z_est;
  j["raw_len"] = o.raw_len;
  j["final_len"] = o.final_key_alice.size();
  j["final_key_alice"] = to_hex(o.final_key_alice);
  j["final_key_bob"] = to_hex(o.final_key_bob);
  j["key_rate"] = o.key_rate;
  j["two_way_steps"] = o.two_way_steps;
  j["n"] = o.n;
  j["k"] = o.k;
  j["m"] = o.m;
  j["t"] = o.t;
  j["diagnostics"] = {{"security_diagnostic", o.diagnostics.security_diagnostic},
                      {"e_x_true", o.diagnostics.e_x_true},
                      {"e_z_true", o.diagnostics.e_z_true},
                      {"ebits_consumed", o.diagnostics.ebits_consumed}};
  return j;
}

ProtocolOutcome run(const ProtocolConfig& config, const SourceSpec& source, Transcript* transcript) {
  const PreparedSource prepared(source);
  return execute(config, prepared, nullptr, transcript, false);
}

ProtocolOutcome run(const ProtocolConfig& config, const PreparedSource& source, const SourceDiagnostics* diagnostics,
                    Transcript* transcript) {
  return execute(config, source, diagnostics, transcript, false);
}

ProtocolOutcome run_reference_m1(const ProtocolConfig& config, const SourceSpec& source, Transcript* transcript) {
  const PreparedSource prepared(source);
  return execute(config, prepared, nullptr, transcript, true);
}

ProtocolOutcome run_reference_m1(const ProtocolConfig& config, const PreparedSource& source,
                                 const SourceDiagnostics* diagnostics, Transcript* transcript) {
  return execute(config, source, diagnostics, transcript, true);
}

}  // namespace pditqkd

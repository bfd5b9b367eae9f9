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

#include "pditqkd/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <mutex>
#include <thread>

#include <toml.hpp>

namespace pditqkd {

namespace {

/// Typed access to one TOML table with full-path error messages.
class TableReader {
 public:
  TableReader(const toml::table* table, std::string path) : table_(table), path_(std::move(path)) {}

  bool present() const { return table_ != nullptr; }
  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void allow_only(std::initializer_list<const char*> keys) const {
    if (!table_) return;
    for (const auto& [k, v] : *table_) {
      const std::string key(k.str());
      if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return key == a; }))
        throw ConfigError(field(key), "unknown field");
    }
  }

  TableReader sub(const std::string& key) const {
    const toml::node* n = node(key);
    if (!n) return {nullptr, field(key)};
    if (!n->is_table()) throw ConfigError(field(key), "expected a table");
    return {n->as_table(), field(key)};
  }

  std::optional<std::int64_t> integer(const std::string& key) const {
    const toml::node* n = node(key);
    if (!n) return std::nullopt;
    if (auto v = n->value_exact<std::int64_t>()) return *v;
    throw ConfigError(field(key), "expected an integer");
  }

  std::optional<std::size_t> count(const std::string& key, std::int64_t min_value = 0) const {
    auto v = integer(key);
    if (!v) return std::nullopt;
    if (*v < min_value) throw ConfigError(field(key), "must be at least " + std::to_string(min_value));
    return static_cast<std::size_t>(*v);
  }

  std::optional<double> real(const std::string& key) const {
    const toml::node* n = node(key);
    if (!n) return std::nullopt;
    if (auto v = n->value<double>()) return *v;
    throw ConfigError(field(key), "expected a number");
  }

  std::optional<std::string> text(const std::string& key) const {
    const toml::node* n = node(key);
    if (!n) return std::nullopt;
    if (auto v = n->value_exact<std::string>()) return *v;
    throw ConfigError(field(key), "expected a string");
  }

  std::optional<bool> boolean(const std::string& key) const {
    const toml::node* n = node(key);
    if (!n) return std::nullopt;
    if (auto v = n->value_exact<bool>()) return *v;
    throw ConfigError(field(key), "expected true or false");
  }

  std::optional<std::vector<double>> reals(const std::string& key) const {
    const toml::node* n = node(key);
    if (!n) return std::nullopt;
    const toml::array* arr = n->as_array();
    if (!arr) throw ConfigError(field(key), "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : *arr) {
      auto v = e.value<double>();
      if (!v) throw ConfigError(field(key), "expected an array of numbers");
      out.push_back(*v);
    }
    return out;
  }

  std::optional<std::vector<std::size_t>> counts(const std::string& key) const {
    const toml::node* n = node(key);
    if (!n) return std::nullopt;
    const toml::array* arr = n->as_array();
    if (!arr) throw ConfigError(field(key), "expected an array of integers");
    std::vector<std::size_t> out;
    for (const auto& e : *arr) {
      auto v = e.value_exact<std::int64_t>();
      if (!v || *v < 0) throw ConfigError(field(key), "expected an array of non-negative integers");
      out.push_back(static_cast<std::size_t>(*v));
    }
    return out;
  }

 private:
  const toml::node* node(const std::string& key) const { return table_ ? table_->get(key) : nullptr; }

  const toml::table* table_;
  std::string path_;
};

/// Pbit with key dimension 2, shields C^2 (x) C^1, U_0 = I, U_1 = X and
/// shield |0><0|. Its untwisted form is a plain ebit with a blank shield.
PditSpec flip_twisted_spec() {
  PditSpec spec;
  spec.key_dim = 2;
  spec.shield_dim_a = 2;
  spec.shield_dim_b = 1;
  const SystemLayout shield{{kShieldA, 2}, {kShieldB, 1}};
  spec.twist_unitaries = {UnitaryOp::identity(shield), UnitaryOp(shield, ops::pauli_x())};
  const std::vector<std::size_t> zero{0, 0};
  spec.shield = DensityMatrix::basis_state(shield, zero);
  return spec;
}

PditSpec parse_target(const TableReader& t) {
  if (!t.present()) throw ConfigError(t.field("kind"), "required table missing");
  const auto kind = t.text("kind");
  if (!kind) throw ConfigError(t.field("kind"), "required field missing");
  auto shield_dims = [&](std::vector<std::size_t> fallback) {
    auto dims = t.counts("shield_dims").value_or(fallback);
    if (dims.size() != 2 || dims[0] < 1 || dims[1] < 1)
      throw ConfigError(t.field("shield_dims"), "expected two positive dimensions");
    return dims;
  };
  auto key_dim = [&] {
    const std::size_t d = t.count("key_dim", 2).value_or(2);
    if (d > 16) throw ConfigError(t.field("key_dim"), "at most 16");
    return d;
  };
  if (*kind == "example_pbit") {
    t.allow_only({"kind", "shield_dim"});
    const std::size_t d = t.count("shield_dim", 2).value_or(2);
    if (d > 16) throw ConfigError(t.field("shield_dim"), "at most 16");
    return example_pbit(d);
  }
  if (*kind == "basic") {
    t.allow_only({"kind", "key_dim", "shield_dims", "shield"});
    const std::size_t d = key_dim();
    const auto dims = shield_dims({1, 1});
    const SystemLayout layout{{kShieldA, dims[0]}, {kShieldB, dims[1]}};
    const std::string shield = t.text("shield").value_or("maximally_mixed");
    if (shield == "maximally_mixed") return untwisted_spec(d, DensityMatrix::maximally_mixed(layout));
    if (shield == "zero") {
      const std::vector<std::size_t> zero{0, 0};
      return untwisted_spec(d, DensityMatrix::basis_state(layout, zero));
    }
    throw ConfigError(t.field("shield"), "expected \"maximally_mixed\" or \"zero\"");
  }
  if (*kind == "random") {
    t.allow_only({"kind", "key_dim", "shield_dims", "seed"});
    const std::size_t d = key_dim();
    const auto dims = shield_dims({2, 2});
    RngStream rng(static_cast<std::uint64_t>(t.integer("seed").value_or(1)));
    return random_pdit_spec(d, dims[0], dims[1], rng);
  }
  if (*kind == "flip_twisted") {
    t.allow_only({"kind"});
    return flip_twisted_spec();
  }
  throw ConfigError(t.field("kind"), "unknown target kind '" + *kind + "'");
}

NoiseChannel parse_channel(const TableReader& c, const PditSpec& target) {
  const auto kind = c.text("kind");
  if (!kind) throw ConfigError(c.field("kind"), "required field missing");
  auto probability = [&](const std::string& key) {
    const double p = c.real(key).value_or(0.0);
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(c.field(key), "must lie in [0, 1]");
    return p;
  };
  if (*kind == "depolarize_key") {
    c.allow_only({"kind", "q"});
    if (!c.real("q")) throw ConfigError(c.field("q"), "required field missing");
    return depolarize_key(probability("q"), target.key_dim);
  }
  if (*kind == "flip") {
    c.allow_only({"kind", "p_bit", "p_phase", "target"});
    const std::string label = c.text("target").value_or(kKeyB);
    if (!target.layout().contains(label)) throw ConfigError(c.field("target"), "no subsystem '" + label + "'");
    if (target.layout().dim_of(label) != 2) throw ConfigError(c.field("target"), "flip channels need a qubit");
    return flip_channels(probability("p_bit"), probability("p_phase"), label);
  }
  throw ConfigError(c.field("kind"), "unknown channel kind '" + *kind + "'");
}

DensityMatrix parse_joint(const TableReader& j, const PditSpec& target, std::size_t n) {
  const auto kind = j.text("kind");
  if (!kind) throw ConfigError(j.field("kind"), "required field missing");
  const std::size_t per_copy = target.layout().total_dim();
  double total = 1.0;
  for (std::size_t i = 0; i < n; ++i) total *= static_cast<double>(per_copy);
  if (total > static_cast<double>(kMaxJointDim))
    throw ConfigError(j.field("kind"), "joint state of " + std::to_string(n) + " copies exceeds the dense limit " +
                                           std::to_string(kMaxJointDim));
  const std::string state = j.text("state").value_or("target");
  DensityMatrix copy;
  if (state == "target") copy = assemble_pdit(target);
  else if (state == "untwisted") copy = basic_pdit(target);
  else throw ConfigError(j.field("state"), "expected \"target\" or \"untwisted\"");

  std::vector<DensityMatrix> copies(n, copy);
  if (*kind == "product") {
    j.allow_only({"kind", "state"});
    return joint_product(copies);
  }
  if (*kind == "correlated_flip") {
    j.allow_only({"kind", "state", "p"});
    const double p = j.real("p").value_or(0.0);
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(j.field("p"), "must lie in [0, 1]");
    const DensityMatrix flipped = flip_channels(1.0, 0.0, kKeyB).apply(copy);
    std::vector<DensityMatrix> flips(n, flipped);
    const DensityMatrix clean = joint_product(copies);
    const DensityMatrix bad = joint_product(flips);
    return DensityMatrix::trusted(clean.layout(), (1.0 - p) * clean.matrix() + p * bad.matrix());
  }
  throw ConfigError(j.field("kind"), "unknown joint kind '" + *kind + "'");
}

std::string field_of(const std::string& message, const std::string& fallback) {
  const auto colon = message.find(':');
  if (colon == std::string::npos) return fallback;
  const std::string head = message.substr(0, colon);
  return head.find(' ') == std::string::npos ? head : fallback;
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir,
                        const std::string& source_name) {
  toml::table root;
  try {
    root = toml::parse(text, source_name);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << e.description() << " (line " << e.source().begin.line << ")";
    throw ConfigError("<syntax>", os.str());
  }
  const TableReader top(&root, "");
  top.allow_only({"name", "seed", "trials", "protocol", "source", "outputs", "gap"});

  Scenario s;
  s.name = top.text("name").value_or("scenario");
  if (auto seed = top.integer("seed")) s.seed = static_cast<std::uint64_t>(*seed);
  s.trials = top.count("trials", 1).value_or(1);

  const TableReader p = top.sub("protocol");
  if (!p.present()) throw ConfigError("protocol", "required table missing");
  p.allow_only({"n", "k", "m", "t", "epsilon", "e_x_max", "e_z_max", "untwist_mode", "teleport_noise",
                "sample_constant", "reference_m1", "ecpa"});
  auto& cfg = s.protocol;
  const auto n = p.count("n", 1);
  if (!n) throw ConfigError("protocol.n", "required field missing");
  cfg.n = *n;
  cfg.k = p.count("k", 1).value_or(0);
  cfg.m = p.count("m", 1).value_or(0);
  cfg.t = p.count("t", 1).value_or(0);
  cfg.epsilon = p.real("epsilon").value_or(cfg.epsilon);
  cfg.e_x_max = p.real("e_x_max").value_or(cfg.e_x_max);
  cfg.e_z_max = p.real("e_z_max").value_or(cfg.e_z_max);
  cfg.sample_constant = p.real("sample_constant").value_or(cfg.sample_constant);
  s.reference_m1 = p.boolean("reference_m1").value_or(false);
  if (auto mode = p.text("untwist_mode")) {
    try {
      cfg.untwist_mode = untwist_mode_from_string(*mode);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("protocol.untwist_mode", e.what());
    }
  }
  if (auto noise = p.reals("teleport_noise")) {
    if (noise->size() != 2) throw ConfigError("protocol.teleport_noise", "expected [eps1, eps2]");
    cfg.noise = {(*noise)[0], (*noise)[1]};
  }
  if (const TableReader e = p.sub("ecpa"); e.present()) {
    e.allow_only({"safety_bits", "round_cap", "hash_bits", "syndrome_overhead", "design_margin", "column_weight",
                  "bp_iterations", "reconcile_attempts"});
    auto& ec = cfg.ecpa;
    ec.safety_bits = e.count("safety_bits").value_or(ec.safety_bits);
    ec.round_cap = e.count("round_cap").value_or(ec.round_cap);
    ec.hash_bits = e.count("hash_bits", 1).value_or(ec.hash_bits);
    ec.syndrome_overhead = e.real("syndrome_overhead").value_or(ec.syndrome_overhead);
    ec.design_margin = e.real("design_margin").value_or(ec.design_margin);
    ec.column_weight = e.count("column_weight", 1).value_or(ec.column_weight);
    ec.bp_iterations = e.count("bp_iterations", 1).value_or(ec.bp_iterations);
    ec.reconcile_attempts = e.count("reconcile_attempts", 1).value_or(ec.reconcile_attempts);
  }

  const TableReader src = top.sub("source");
  src.allow_only({"mode", "ebit_fidelity", "target", "channel", "joint"});
  auto& source = s.source;
  try {
    source.mode = source_mode_from_string(src.text("mode").value_or("honest"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("source.mode", e.what());
  }
  source.ebit_fidelity = src.real("ebit_fidelity").value_or(1.0);
  if (!(source.ebit_fidelity >= 0.5 && source.ebit_fidelity <= 1.0))
    throw ConfigError("source.ebit_fidelity", "must lie in [1/2, 1]");
  const TableReader target = src.sub("target");
  source.target = target.present() ? parse_target(target) : example_pbit(2);
  const TableReader channel = src.sub("channel");
  const TableReader joint = src.sub("joint");
  switch (source.mode) {
    case SourceMode::honest:
      if (channel.present()) throw ConfigError("source.channel", "not allowed in honest mode");
      if (joint.present()) throw ConfigError("source.joint", "not allowed in honest mode");
      break;
    case SourceMode::iid_attack:
      if (!channel.present()) throw ConfigError("source.channel", "required for iid_attack");
      if (joint.present()) throw ConfigError("source.joint", "not allowed in iid_attack mode");
      source.channel = parse_channel(channel, source.target);
      break;
    case SourceMode::joint_attack:
      if (!joint.present()) throw ConfigError("source.joint", "required for joint_attack");
      if (channel.present()) throw ConfigError("source.channel", "not allowed in joint_attack mode");
      source.joint_state = parse_joint(joint, source.target, cfg.n);
      break;
  }

  const TableReader o = top.sub("outputs");
  o.allow_only({"outcome_json", "transcript_ndjson", "gap_csv"});
  auto path_of = [&](const std::string& key) -> std::optional<std::filesystem::path> {
    auto v = o.text(key);
    if (!v) return std::nullopt;
    if (v->empty()) throw ConfigError(o.field(key), "empty path");
    std::filesystem::path path(*v);
    return path.is_absolute() ? path : base_dir / path;
  };
  s.outputs.outcome_json = path_of("outcome_json");
  s.outputs.transcript_ndjson = path_of("transcript_ndjson");
  s.outputs.gap_csv = path_of("gap_csv");
  std::set<std::string> seen;
  for (const auto& path : {s.outputs.outcome_json, s.outputs.transcript_ndjson, s.outputs.gap_csv})
    if (path && !seen.insert(std::filesystem::weakly_canonical(*path).string()).second)
      throw ConfigError("outputs", "output paths must be distinct");

  const TableReader g = top.sub("gap");
  g.allow_only({"d_values"});
  s.gap_d_values = g.counts("d_values").value_or(std::vector<std::size_t>{});

  // Cross-field checks on the resolved protocol and the source.
  try {
    cfg.resolved(source.target.key_dim).validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(field_of(e.what(), "protocol"), e.what());
  }
  try {
    source.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("source", e.what());
  }
  if (source.joint_state && joint_copy_count(source.joint_state->layout(), source.target) != cfg.n)
    throw ConfigError("source.joint", "joint state copy count differs from protocol.n");
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot read " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str(), path.parent_path(), path.string());
}

std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial) { return RngStream(seed).split(trial).seed(); }

EnsembleResult run_trials(const Scenario& scenario, std::size_t threads, bool keep_transcripts) {
  const PreparedSource prepared(scenario.source);
  const SourceDiagnostics diag = diagnose_source(prepared, scenario.protocol.untwist_mode);

  EnsembleResult result;
  result.outcomes.resize(scenario.trials);
  if (keep_transcripts) result.transcripts.resize(scenario.trials);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < scenario.trials; i = next++) {
      try {
        ProtocolConfig cfg = scenario.protocol;
        cfg.seed = trial_seed(scenario.seed, i);
        Transcript* tr = keep_transcripts ? &result.transcripts[i] : nullptr;
        result.outcomes[i] = scenario.reference_m1 ? run_reference_m1(cfg, prepared, &diag, tr)
                                                   : run(cfg, prepared, &diag, tr);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, scenario.trials));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return result;
}

void write_outcomes_ndjson(const EnsembleResult& result, std::ostream& out) {
  for (std::size_t i = 0; i < result.outcomes.size(); ++i) {
    Json line = {{"trial", i}};
    const Json record = to_json(result.outcomes[i]);
    for (auto it = record.begin(); it != record.end(); ++it) line[it.key()] = *it;
    out << line.dump() << '\n';
  }
}

void write_transcripts_ndjson(const EnsembleResult& result, std::ostream& out) {
  for (std::size_t i = 0; i < result.transcripts.size(); ++i)
    for (const auto& e : result.transcripts[i].events()) {
      Json line = {{"trial", i}};
      for (auto it = e.begin(); it != e.end(); ++it) line[it.key()] = *it;
      out << line.dump() << '\n';
    }
}

std::vector<GapRecord> gap_scan(std::span<const std::size_t> d_values, const Scenario& tmpl, std::size_t trials,
                                std::size_t threads) {
  if (trials == 0) throw std::invalid_argument("gap_scan: trials must be at least 1");
  std::vector<GapRecord> records;
  for (std::size_t d : d_values) {
    if (d < 2 || d > 16) throw std::invalid_argument("gap_scan: d = " + std::to_string(d) + " outside [2, 16]");
    Scenario s = tmpl;
    s.trials = trials;
    s.reference_m1 = false;
    s.source = SourceSpec{};
    s.source.target = example_pbit(d);
    const EnsembleResult ens = run_trials(s, threads);

    GapRecord r;
    r.d = d;
    r.n_used = s.protocol.n;
    std::size_t aborted = 0;
    double rate = 0.0;
    for (const auto& o : ens.outcomes) {
      if (o.aborted) ++aborted;
      rate += o.key_rate;
    }
    r.key_rate = rate / static_cast<double>(trials);
    r.aborted_fraction = static_cast<double>(aborted) / static_cast<double>(trials);
    r.aborted = aborted == trials;
    const LabelList alice_side{kKeyA, kShieldA};
    r.ln_per_copy = log_negativity(assemble_pdit(s.source.target), alice_side);
    r.ed_bound = ed_bound_example(d);
    records.push_back(r);
  }
  return records;
}

void write_gap_csv(std::span<const GapRecord> records, std::ostream& out) {
  out << "d,key_rate,ln_per_copy,ed_bound,aborted_fraction\n";
  char line[160];
  for (const auto& r : records) {
    std::snprintf(line, sizeof line, "%zu,%.6f,%.9f,%.9f,%.4f\n", r.d, r.key_rate, r.ln_per_copy, r.ed_bound,
                  r.aborted_fraction);
    out << line;
  }
}

}  // namespace pditqkd

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

#include "pditqkd/cli.hpp"

#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <string>

#include "pditqkd/metrics.hpp"
#include "pditqkd/scenario.hpp"

namespace pditqkd {

namespace {

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  body(f);
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

Scenario default_gap_template() {
  Scenario s;
  s.name = "gap";
  s.protocol.n = 10000;
  return s;
}

}  // namespace

int run_command(const RunOptions& options, std::ostream& out, std::ostream& err) {
  Scenario scenario;
  try {
    scenario = load_scenario(options.config);
    if (options.seed) scenario.seed = *options.seed;
    if (options.trials) {
      if (*options.trials == 0) throw ConfigError("trials", "must be at least 1");
      scenario.trials = *options.trials;
    }
    if (options.transcript) scenario.outputs.transcript_ndjson = *options.transcript;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  try {
    const bool transcripts = scenario.outputs.transcript_ndjson.has_value();
    const EnsembleResult result = run_trials(scenario, options.threads, transcripts);
    if (scenario.outputs.outcome_json) {
      write_file(*scenario.outputs.outcome_json, [&](std::ostream& f) { write_outcomes_ndjson(result, f); });
    } else {
      write_outcomes_ndjson(result, out);
    }
    if (transcripts)
      write_file(*scenario.outputs.transcript_ndjson, [&](std::ostream& f) { write_transcripts_ndjson(result, f); });
    if (scenario.outputs.gap_csv) {
      const auto records = gap_scan(scenario.gap_d_values, scenario, scenario.trials, options.threads);
      write_file(*scenario.outputs.gap_csv, [&](std::ostream& f) { write_gap_csv(records, f); });
    }
    std::size_t aborted = 0;
    for (const auto& o : result.outcomes) aborted += o.aborted ? 1 : 0;
    err << scenario.name << ": " << result.outcomes.size() << " trials, " << aborted << " aborted\n";
  } catch (const std::exception& e) {
    err << "runtime failure: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

int gap_scan_command(const GapScanOptions& options, std::ostream& out, std::ostream& err) {
  Scenario tmpl;
  std::size_t trials = 1;
  std::optional<std::filesystem::path> out_path = options.out;
  try {
    tmpl = options.config ? load_scenario(*options.config) : default_gap_template();
    if (options.seed) tmpl.seed = *options.seed;
    trials = options.trials.value_or(options.config ? tmpl.trials : 1);
    if (trials == 0) throw ConfigError("trials", "must be at least 1");
    if (!out_path) out_path = tmpl.outputs.gap_csv;
    for (auto d : options.d_values)
      if (d < 2 || d > 16) throw ConfigError("d", "value " + std::to_string(d) + " outside [2, 16]");
    try {
      tmpl.protocol.resolved(2).validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("protocol", e.what());
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  try {
    const auto records = gap_scan(options.d_values, tmpl, trials, options.threads);
    if (out_path) {
      write_file(*out_path, [&](std::ostream& f) { write_gap_csv(records, f); });
    } else {
      write_gap_csv(records, out);
    }
  } catch (const std::exception& e) {
    err << "runtime failure: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

int verify_command(std::ostream& out) {
  struct Check {
    std::string name;
    std::function<bool()> body;
  };
  const std::vector<Check> checks = {
      {"random pdits have ideal ccq states",
       [] {
         RngStream rng(11);
         for (int i = 0; i < 10; ++i) {
           const auto spec = random_pdit_spec(2, 2, 2, rng);
           if (!is_ideal_ccq(ccq_of(assemble_pdit(spec), 2), 1e-9)) return false;
         }
         return true;
       }},
      {"local and global untwisting give P+ (x) shield",
       [] {
         RngStream rng(12);
         for (int i = 0; i < 10; ++i) {
           const auto spec = random_pdit_spec(2, 2, 3, rng);
           const auto gamma = assemble_pdit(spec);
           const auto target = basic_pdit(spec);
           const auto local = apply_unitary(gamma, untwist_local(spec));
           const auto global = apply_unitary(gamma, untwist_global(spec, default_twist_table(spec)));
           if (trace_distance(local, target) > 1e-10 || trace_distance(global, target) > 1e-10) return false;
         }
         return true;
       }},
      {"example pbit equals its Bell-diagonal form",
       [] {
         for (std::size_t d : {2, 3, 4}) {
           const double p = example_pbit_weight(d);
           Vector plus = Vector::Zero(4), minus = Vector::Zero(4);
           plus(0) = plus(3) = minus(0) = 1.0 / std::sqrt(2.0);
           minus(3) = -1.0 / std::sqrt(2.0);
           const Matrix expected = p * ops::kron(plus * plus.adjoint(), symmetric_state(d).matrix()) +
                                   (1 - p) * ops::kron(minus * minus.adjoint(), antisymmetric_state(d).matrix());
           if ((assemble_pdit(example_pbit(d)).matrix() - expected).cwiseAbs().maxCoeff() > 1e-12) return false;
         }
         return true;
       }},
      {"log-negativity of the example pbit within log2(1 + 1/d)",
       [] {
         const LabelList side{kKeyA, kShieldA};
         for (std::size_t d : {2, 4}) {
           if (log_negativity(assemble_pdit(example_pbit(d)), side) > ed_bound_example(d) + 1e-9) return false;
         }
         return true;
       }},
      {"main and fully untwisted protocols agree on raw keys",
       [] {
         SourceSpec s;
         s.target = example_pbit(2);
         ProtocolConfig c;
         c.n = 400;
         c.seed = 5;
         const auto a = run(c, s);
         const auto b = run_reference_m1(c, s);
         return a.raw_key_alice == b.raw_key_alice && a.raw_key_bob == b.raw_key_bob && a.e_z_est == b.e_z_est;
       }},
      {"noiseless run yields equal keys",
       [] {
         SourceSpec s;
         s.target = example_pbit(2);
         ProtocolConfig c;
         c.n = 1000;
         c.seed = 9;
         const auto o = run(c, s);
         return !o.aborted && o.final_key_alice == o.final_key_bob && !o.final_key_alice.empty();
       }},
  };
  bool all = true;
  for (const auto& c : checks) {
    bool ok = false;
    try {
      ok = c.body();
    } catch (const std::exception& e) {
      out << "  error: " << e.what() << '\n';
    }
    out << (ok ? "PASS " : "FAIL ") << c.name << '\n';
    all = all && ok;
  }
  return all ? kExitOk : kExitRuntime;
}

}  // namespace pditqkd

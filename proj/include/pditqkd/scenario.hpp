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
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pditqkd/channels.hpp"
#include "pditqkd/metrics.hpp"
#include "pditqkd/protocol.hpp"

namespace pditqkd {

/// Invalid scenario configuration; field() names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct OutputPaths {
  std::optional<std::filesystem::path> outcome_json;
  std::optional<std::filesystem::path> transcript_ndjson;
  std::optional<std::filesystem::path> gap_csv;
};

struct Scenario {
  std::string name;
  std::uint64_t seed = 0;
  std::size_t trials = 1;
  bool reference_m1 = false;
  ProtocolConfig protocol;  // protocol.seed is set per trial
  SourceSpec source;
  OutputPaths outputs;
  std::vector<std::size_t> gap_d_values;
};

/// Parses TOML text. Relative output paths are resolved against base_dir.
/// Throws ConfigError.
Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir = {},
                        const std::string& source_name = "<config>");
Scenario load_scenario(const std::filesystem::path& path);

/// Seed of trial i: independent of the number of trials.
std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial);

struct EnsembleResult {
  std::vector<ProtocolOutcome> outcomes;
  std::vector<Transcript> transcripts;  // empty unless requested
};

/// Runs scenario.trials seeded trials on up to `threads` threads. Results are
/// in trial order and independent of the thread count.
EnsembleResult run_trials(const Scenario& scenario, std::size_t threads = 1, bool keep_transcripts = false);

void write_outcomes_ndjson(const EnsembleResult& result, std::ostream& out);
void write_transcripts_ndjson(const EnsembleResult& result, std::ostream& out);

/// Honest runs on example_pbit(d) for each d, using the protocol section and
/// seed of `tmpl`. Accepts 2 <= d <= 16.
std::vector<GapRecord> gap_scan(std::span<const std::size_t> d_values, const Scenario& tmpl, std::size_t trials,
                                std::size_t threads = 1);

/// Header `d,key_rate,ln_per_copy,ed_bound,aborted_fraction`, fixed precision.
void write_gap_csv(std::span<const GapRecord> records, std::ostream& out);

}  // namespace pditqkd

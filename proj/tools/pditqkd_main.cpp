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

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pditqkd/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Simulator for key distribution from private states with untrusted sources"};
  app.require_subcommand(1);

  pditqkd::RunOptions run;
  std::string run_config;
  std::uint64_t run_seed = 0;
  std::size_t run_trials = 0;
  std::string run_transcript;
  auto* run_cmd = app.add_subcommand("run", "Run the trials of a scenario file");
  run_cmd->add_option("config", run_config, "Scenario TOML file")->required();
  auto* run_seed_opt = run_cmd->add_option("--seed", run_seed, "Override the scenario seed");
  auto* run_trials_opt = run_cmd->add_option("--trials", run_trials, "Override the trial count");
  auto* run_transcript_opt = run_cmd->add_option("--transcript", run_transcript, "Write public messages as NDJSON");
  run_cmd->add_option("--threads", run.threads, "Worker threads for trials")->check(CLI::PositiveNumber);

  pditqkd::GapScanOptions gap;
  std::string gap_config, gap_out;
  std::uint64_t gap_seed = 0;
  std::size_t gap_trials = 0;
  auto* gap_cmd = app.add_subcommand("gap-scan", "Key rate versus the entanglement bound of example pbits");
  gap_cmd->add_option("--d", gap.d_values, "Shield dimensions, comma separated")->delimiter(',');
  auto* gap_config_opt = gap_cmd->add_option("--config", gap_config, "Scenario used as protocol template");
  auto* gap_out_opt = gap_cmd->add_option("--out", gap_out, "CSV output path");
  auto* gap_seed_opt = gap_cmd->add_option("--seed", gap_seed, "Override the template seed");
  auto* gap_trials_opt = gap_cmd->add_option("--trials", gap_trials, "Trials per dimension");
  gap_cmd->add_option("--threads", gap.threads, "Worker threads for trials")->check(CLI::PositiveNumber);

  auto* verify_cmd = app.add_subcommand("verify", "Run the built-in invariant checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : pditqkd::kExitConfig;
  }

  if (*run_cmd) {
    run.config = run_config;
    if (*run_seed_opt) run.seed = run_seed;
    if (*run_trials_opt) run.trials = run_trials;
    if (*run_transcript_opt) run.transcript = run_transcript;
    return pditqkd::run_command(run, std::cout, std::cerr);
  }
  if (*gap_cmd) {
    if (*gap_config_opt) gap.config = gap_config;
    if (*gap_out_opt) gap.out = gap_out;
    if (*gap_seed_opt) gap.seed = gap_seed;
    if (*gap_trials_opt) gap.trials = gap_trials;
    return pditqkd::gap_scan_command(gap, std::cout, std::cerr);
  }
  if (*verify_cmd) return pditqkd::verify_command(std::cout);
  return pditqkd::kExitConfig;
}

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
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "gtest/gtest.h"
#include "pditqkd/cli.hpp"

using namespace pditqkd;
namespace fs = std::filesystem;

namespace {

const char* kHonest = R"(
name = "honest"
seed = 42
trials = 3

[protocol]
n = 1000
k = 100
m = 50

[source]
mode = "honest"

[source.target]
kind = "example_pbit"
shield_dim = 2
)";

std::string field_of(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("pditqkd_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(ParseScenario, reads_fields) {
  const auto s = parse_scenario(kHonest);
  ASSERT_EQ(s.name, "honest");
  ASSERT_EQ(s.seed, 42u);
  ASSERT_EQ(s.trials, 3u);
  ASSERT_EQ(s.protocol.n, 1000u);
  ASSERT_EQ(s.protocol.k, 100u);
  ASSERT_EQ(s.source.mode, SourceMode::honest);
  ASSERT_EQ(s.source.target.shield_dim_a, 2u);
  ASSERT_FALSE(s.reference_m1);
}

TEST(ParseScenario, attack_sources) {
  const std::string text = std::string(kHonest) + R"(
[source.channel]
kind = "depolarize_key"
q = 0.1
)";
  std::string t = text;
  t.replace(t.find("mode = \"honest\""), 15, "mode = \"iid_attack\"");
  const auto s = parse_scenario(t);
  ASSERT_EQ(s.source.mode, SourceMode::iid_attack);
  ASSERT_TRUE(s.source.channel.has_value());
}

TEST(ParseScenario, errors_name_the_field) {
  ASSERT_EQ(field_of("[source]\nmode = \"honest\"\n[source.target]\nkind = \"example_pbit\"\nshield_dim = 2\n"
                     "[protocol]\nk = 3\n"),
            "protocol.n");
  std::string unknown = kHonest;
  unknown += "\n[gap]\nd_values = [2]\nbogus = 1\n";
  ASSERT_EQ(field_of(unknown), "gap.bogus");
  std::string bad_mode = kHonest;
  bad_mode.replace(bad_mode.find("\"honest\"\n\n[source"), 8, "\"sneaky\"");
  ASSERT_EQ(field_of(bad_mode), "source.mode");
  std::string bad_q = kHonest;
  bad_q.replace(bad_q.find("mode = \"honest\""), 15, "mode = \"iid_attack\"");
  bad_q += "\n[source.channel]\nkind = \"depolarize_key\"\nq = 1.5\n";
  ASSERT_EQ(field_of(bad_q), "source.channel.q");
  ASSERT_THROW(parse_scenario("this is = = not toml"), ConfigError);
}

TEST(ParseScenario, output_paths_resolve_against_base) {
  std::string t = kHonest;
  t += "\n[outputs]\noutcome_json = \"out/a.ndjson\"\ngap_csv = \"out/g.csv\"\n";
  const auto s = parse_scenario(t, "/cfg");
  ASSERT_EQ(*s.outputs.outcome_json, fs::path("/cfg/out/a.ndjson"));
  std::string dup = kHonest;
  dup += "\n[outputs]\noutcome_json = \"a\"\ngap_csv = \"a\"\n";
  ASSERT_THROW(parse_scenario(dup, "/cfg"), ConfigError);
}

TEST(TrialSeed, deterministic_and_distinct) {
  ASSERT_EQ(trial_seed(1, 0), trial_seed(1, 0));
  ASSERT_NE(trial_seed(1, 0), trial_seed(1, 1));
  ASSERT_NE(trial_seed(1, 0), trial_seed(2, 0));
}

TEST(RunTrials, thread_count_does_not_change_output) {
  const auto s = parse_scenario(kHonest);
  std::ostringstream one, four;
  write_outcomes_ndjson(run_trials(s, 1), one);
  write_outcomes_ndjson(run_trials(s, 4), four);
  const std::string text = one.str();
  ASSERT_EQ(text, four.str());
  ASSERT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
  ASSERT_EQ(text.rfind("{\"trial\":0", 0), 0u);
}

TEST(RunTrials, transcripts_on_request) {
  const auto s = parse_scenario(kHonest);
  const auto r = run_trials(s, 1, true);
  ASSERT_EQ(r.transcripts.size(), 3u);
  ASSERT_TRUE(run_trials(s, 1, false).transcripts.empty());
}

TEST(GapScan, csv_layout) {
  auto tmpl = parse_scenario(kHonest);
  const std::vector<std::size_t> d{2, 4};
  const auto records = gap_scan(d, tmpl, 1);
  ASSERT_EQ(records.size(), 2u);
  ASSERT_NEAR(records[0].ed_bound, 0.584962500721156, 1e-12);
  std::ostringstream csv;
  write_gap_csv(records, csv);
  ASSERT_EQ(csv.str().substr(0, csv.str().find('\n')), "d,key_rate,ln_per_copy,ed_bound,aborted_fraction");
  const std::vector<std::size_t> bad{1};
  ASSERT_THROW(gap_scan(bad, tmpl, 1), std::invalid_argument);
}

TEST(Cli, run_exit_codes) {
  const auto dir = scratch_dir("cli");
  {
    std::ofstream(dir / "ok.toml") << kHonest << "\n[outputs]\noutcome_json = \"out.ndjson\"\n";
    std::ofstream(dir / "bad.toml") << "[protocol]\nk = 1\n";
  }
  std::ostringstream out, err;
  RunOptions o;
  o.config = dir / "ok.toml";
  ASSERT_EQ(run_command(o, out, err), kExitOk);
  ASSERT_FALSE(slurp(dir / "out.ndjson").empty());
  o.config = dir / "bad.toml";
  ASSERT_EQ(run_command(o, out, err), kExitConfig);
  ASSERT_NE(err.str().find("config error"), std::string::npos);
  o.config = dir / "missing.toml";
  ASSERT_EQ(run_command(o, out, err), kExitConfig);
  fs::remove_all(dir);
}

TEST(Cli, run_is_byte_identical_across_invocations) {
  const auto dir = scratch_dir("repeat");
  std::ofstream(dir / "c.toml") << kHonest;
  RunOptions o;
  o.config = dir / "c.toml";
  o.transcript = dir / "t.ndjson";
  std::ostringstream a, b, err;
  ASSERT_EQ(run_command(o, a, err), kExitOk);
  const auto t1 = slurp(dir / "t.ndjson");
  o.threads = 3;
  ASSERT_EQ(run_command(o, b, err), kExitOk);
  ASSERT_EQ(a.str(), b.str());
  ASSERT_EQ(t1, slurp(dir / "t.ndjson"));
  fs::remove_all(dir);
}

TEST(Cli, verify_passes) {
  std::ostringstream out;
  ASSERT_EQ(verify_command(out), kExitOk);
  ASSERT_EQ(out.str().find("FAIL"), std::string::npos);
}

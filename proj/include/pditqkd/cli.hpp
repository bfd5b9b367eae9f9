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
#include <vector>

namespace pditqkd {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

struct RunOptions {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<std::filesystem::path> transcript;
  std::size_t threads = 1;
};

struct GapScanOptions {
  std::vector<std::size_t> d_values{2, 4, 8, 16};
  std::optional<std::filesystem::path> config;  // protocol template; n = 10^4 when absent
  std::optional<std::filesystem::path> out;     // stdout when absent and the template names none
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::size_t threads = 1;
};

/// `run`: executes the scenario's trials and writes its declared outputs.
/// Outcomes go to `out` as NDJSON when the scenario names no outcome file.
int run_command(const RunOptions& options, std::ostream& out, std::ostream& err);

/// `gap-scan`: key rate against the entanglement bound for example pbits.
int gap_scan_command(const GapScanOptions& options, std::ostream& out, std::ostream& err);

/// `verify`: built-in invariant checks, one PASS/FAIL line each.
int verify_command(std::ostream& out);

}  // namespace pditqkd

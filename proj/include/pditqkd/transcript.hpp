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
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace pditqkd {

using Json = nlohmann::ordered_json;

/// Log of the public classical messages exchanged during one protocol run.
class Transcript {
 public:
  /// Appends {"seq", "stage", "event", ...payload}.
  void record(const std::string& stage, const std::string& event, Json payload = Json::object());

  const std::vector<Json>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }

  /// One JSON object per line.
  void write_ndjson(std::ostream& out) const;

 private:
  std::vector<Json> events_;
};

/// Records into `t` when it is non-null.
inline void note(Transcript* t, const std::string& stage, const std::string& event, Json payload = Json::object()) {
  if (t) t->record(stage, event, std::move(payload));
}

}  // namespace pditqkd

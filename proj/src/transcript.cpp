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

#include "pditqkd/transcript.hpp"

namespace pditqkd {

void Transcript::record(const std::string& stage, const std::string& event, Json payload) {
  Json e = Json::object();
  e["seq"] = events_.size();
  e["stage"] = stage;
  e["event"] = event;
  for (auto it = payload.begin(); it != payload.end(); ++it) e[it.key()] = std::move(it.value());
  events_.push_back(std::move(e));
}

void Transcript::write_ndjson(std::ostream& out) const {
  for (const auto& e : events_) out << e.dump() << '\n';
}

}  // namespace pditqkd

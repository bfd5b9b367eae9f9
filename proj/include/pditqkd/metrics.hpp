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
#include <span>
#include <string>

#include "pditqkd/pdit.hpp"
#include "pditqkd/qcore.hpp"

namespace pditqkd {

/// One row of the key-versus-entanglement comparison for the example pbit.
struct GapRecord {
  std::size_t d = 0;              // shield dimension of the example state
  double key_rate = 0.0;          // measured key bits per copy (mean over trials)
  double ln_per_copy = 0.0;       // log-negativity of one copy across AA'|BB'
  double ed_bound = 0.0;          // log2(1 + 1/d)
  std::size_t n_used = 0;         // copies requested per trial
  double aborted_fraction = 0.0;  // fraction of trials that aborted
  bool aborted = false;           // every trial aborted
};

/// log2 || rho^{T_side} ||_1 across the cut (side | rest of the layout).
/// `side` must be a nonempty proper subset of the layout labels.
double log_negativity(const DensityMatrix& rho, std::span<const std::string> side);

/// log2(1 + 1/d).
double ed_bound_example(std::size_t d);

/// max(0, 1 - h(e_x) - h(e_z)).
double key_rate_bound(double e_x, double e_z);

/// Trace distance between the ccq operator sum_ij |ij><ij| (x) p_ij rho_E^ij
/// and the ideal sum_i |ii><ii|/d (x) rho_E with the same Eve marginal.
double security_diagnostic(const CcqState& ccq);

}  // namespace pditqkd

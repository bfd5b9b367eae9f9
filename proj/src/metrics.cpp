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

#include "pditqkd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pditqkd {

double log_negativity(const DensityMatrix& rho, std::span<const std::string> side) {
  if (side.empty() || side.size() >= rho.layout().size())
    throw std::invalid_argument("log_negativity: cut must split the layout into two nonempty parts");
  // ||rho^{T_X}||_1 = ||rho^{T_Y}||_1, so transpose whichever side is given.
  const double norm = hermitian_trace_norm(partial_transpose(rho, side));
  return std::max(0.0, std::log2(norm));
}

double ed_bound_example(std::size_t d) {
  if (d < 2) throw std::invalid_argument("ed_bound_example: d must be at least 2");
  return std::log2(1.0 + 1.0 / static_cast<double>(d));
}

double key_rate_bound(double e_x, double e_z) {
  if (!(e_x >= 0.0 && e_x <= 0.5) || !(e_z >= 0.0 && e_z <= 0.5))
    throw std::invalid_argument("key_rate_bound: error rates must lie in [0, 1/2]");
  return std::max(0.0, 1.0 - binary_entropy(e_x) - binary_entropy(e_z));
}

double security_diagnostic(const CcqState& ccq) {
  const DensityMatrix eve = ccq.eve_marginal();
  const auto& ideal = eve.matrix();
  const std::size_t d = ccq.key_dim;
  double total = 0.0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double p = ccq.probs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      Matrix block = Matrix::Zero(ideal.rows(), ideal.cols());
      if (const auto& st = ccq.eve_state(i, j)) block = p * st->matrix();
      if (i == j) block -= ideal / static_cast<double>(d);
      total += hermitian_trace_norm(block);
    }
  return std::clamp(0.5 * total, 0.0, 1.0);
}

}  // namespace pditqkd

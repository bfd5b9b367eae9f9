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

#include "pditqkd/channels.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pditqkd {

namespace {

void require_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
}

}  // namespace

// ---------------------------------------------------------------------------
// NoiseChannel

NoiseChannel::NoiseChannel(SystemLayout targets, std::vector<Matrix> kraus)
    : targets_(std::move(targets)), kraus_(std::move(kraus)) {
  if (kraus_.empty()) throw std::invalid_argument("NoiseChannel: no Kraus operators");
  const auto D = static_cast<Eigen::Index>(targets_.total_dim());
  Matrix sum = Matrix::Zero(D, D);
  for (const auto& k : kraus_) {
    if (k.rows() != D || k.cols() != D)
      throw std::invalid_argument("NoiseChannel: Kraus operator does not match " + targets_.describe());
    sum += k.adjoint() * k;
  }
  const double dev = (sum - Matrix::Identity(D, D)).cwiseAbs().maxCoeff();
  if (dev > 1e-10) {
    std::ostringstream os;
    os << "NoiseChannel: Kraus operators are not complete (deviation " << dev << ")";
    throw std::invalid_argument(os.str());
  }
}

NoiseChannel NoiseChannel::identity(SystemLayout targets) {
  const auto D = targets.total_dim();
  return NoiseChannel(std::move(targets), {ops::identity(D)});
}

DensityMatrix NoiseChannel::apply(const DensityMatrix& rho) const {
  const auto labels = targets_.labels();
  return apply_to(rho, labels);
}

DensityMatrix NoiseChannel::apply_to(const DensityMatrix& rho, std::span<const std::string> labels) const {
  if (rho.layout().select(labels).dims() != targets_.dims())
    throw std::invalid_argument("NoiseChannel: target dimensions do not match " + targets_.describe());
  if (kraus_.size() == 1 && kraus_[0].isIdentity(0.0)) return rho;
  return apply_kraus(rho, kraus_, labels);
}

NoiseChannel depolarize_key(double q, std::size_t key_dim) {
  require_probability(q, "depolarize_key: q");
  if (key_dim < 2) throw std::invalid_argument("depolarize_key: key dimension must be at least 2");
  const SystemLayout targets{{kKeyA, key_dim}, {kKeyB, key_dim}};
  const double D = static_cast<double>(key_dim * key_dim);
  // Uniform mixture over the D^2 Weyl operators X^a Z^b (x) X^c Z^e is the
  // completely depolarizing map; the identity term absorbs the weight 1 - q.
  std::vector<Matrix> weyl;
  for (std::size_t a = 0; a < key_dim; ++a)
    for (std::size_t b = 0; b < key_dim; ++b) {
      Matrix w = ops::identity(key_dim);
      for (std::size_t s = 0; s < a; ++s) w = ops::shift(key_dim) * w;
      for (std::size_t s = 0; s < b; ++s) w = w * ops::clock(key_dim);
      weyl.push_back(std::move(w));
    }
  std::vector<Matrix> kraus;
  kraus.push_back(std::sqrt(1.0 - q + q / (D * D)) * ops::identity(key_dim * key_dim));
  if (q > 0.0) {
    const double c = std::sqrt(q) / D;
    for (std::size_t x = 0; x < weyl.size(); ++x)
      for (std::size_t y = 0; y < weyl.size(); ++y) {
        if (x == 0 && y == 0) continue;
        kraus.push_back(c * ops::kron(weyl[x], weyl[y]));
      }
  }
  return NoiseChannel(targets, std::move(kraus));
}

NoiseChannel flip_channels(double p_bit, double p_phase, const std::string& target_label) {
  require_probability(p_bit, "flip_channels: p_bit");
  require_probability(p_phase, "flip_channels: p_phase");
  const SystemLayout targets{{target_label, 2}};
  std::vector<Matrix> kraus;
  const double w_i = (1.0 - p_bit) * (1.0 - p_phase);
  const double w_x = p_bit * (1.0 - p_phase);
  const double w_z = (1.0 - p_bit) * p_phase;
  const double w_xz = p_bit * p_phase;
  if (w_i > 0.0) kraus.push_back(std::sqrt(w_i) * ops::identity(2));
  if (w_x > 0.0) kraus.push_back(std::sqrt(w_x) * ops::pauli_x());
  if (w_z > 0.0) kraus.push_back(std::sqrt(w_z) * ops::pauli_z());
  if (w_xz > 0.0) kraus.push_back(std::sqrt(w_xz) * (ops::pauli_x() * ops::pauli_z()));
  return NoiseChannel(targets, std::move(kraus));
}

DensityMatrix depolarize_subsystems(const DensityMatrix& rho, std::span<const std::string> labels, double q) {
  require_probability(q, "depolarize_subsystems: q");
  if (q == 0.0 || labels.empty()) return rho;
  const auto& layout = rho.layout();
  const SystemLayout noisy = layout.select(labels);
  const SystemLayout rest = layout.without(labels);
  const auto rest_labels = rest.labels();
  DensityMatrix replaced = tensor(reduced_state(rho, rest_labels), DensityMatrix::maximally_mixed(noisy));
  replaced = reduced_state(replaced, layout.labels());  // back to the original factor order
  return DensityMatrix::trusted(layout, (1.0 - q) * rho.matrix() + q * replaced.matrix());
}

DensityMatrix werner_state(double fidelity) {
  if (!(fidelity >= 0.5 && fidelity <= 1.0)) throw std::invalid_argument("werner_state: fidelity must lie in [1/2, 1]");
  const Matrix pp = max_entangled(2).matrix();
  const Matrix m = fidelity * pp + (1.0 - fidelity) / 3.0 * (ops::identity(4) - pp);
  return DensityMatrix(SystemLayout{{kKeyA, 2}, {kKeyB, 2}}, m);
}

std::vector<DensityMatrix> ebit_source(double fidelity, std::size_t count, RngStream& /*rng*/) {
  // Werner copies are identical; the stream is accepted for interface
  // uniformity with sources that randomize preparation.
  return std::vector<DensityMatrix>(count, werner_state(fidelity));
}

// ---------------------------------------------------------------------------
// Sources

std::string to_string(SourceMode mode) {
  switch (mode) {
    case SourceMode::honest: return "honest";
    case SourceMode::iid_attack: return "iid_attack";
    case SourceMode::joint_attack: return "joint_attack";
  }
  return "unknown";
}

SourceMode source_mode_from_string(const std::string& name) {
  if (name == "honest") return SourceMode::honest;
  if (name == "iid_attack") return SourceMode::iid_attack;
  if (name == "joint_attack") return SourceMode::joint_attack;
  throw std::invalid_argument("unknown source mode '" + name + "'");
}

std::size_t joint_copy_count(const SystemLayout& layout, const PditSpec& target) {
  const auto& sys = layout.systems();
  if (sys.empty() || sys.size() % 4 != 0)
    throw std::invalid_argument("joint state layout " + layout.describe() + " is not n x (A, B, A', B')");
  const std::size_t n = sys.size() / 4;
  const auto per_copy = target.layout().dims();
  for (std::size_t i = 0; i < n; ++i) {
    const auto labels = CopyLabels::of_copy(i).all();
    for (std::size_t k = 0; k < 4; ++k) {
      const auto& s = sys[4 * i + k];
      if (s.label != labels[k] || s.dim != per_copy[k])
        throw std::invalid_argument("joint state layout " + layout.describe() + " does not match n x " +
                                    target.layout().describe() + " at subsystem " + s.label);
    }
  }
  return n;
}

void SourceSpec::validate() const {
  target.validate();
  if (!(ebit_fidelity >= 0.5 && ebit_fidelity <= 1.0))
    throw std::invalid_argument("SourceSpec: ebit_fidelity must lie in [1/2, 1]");
  switch (mode) {
    case SourceMode::honest:
      if (channel || joint_state) throw std::invalid_argument("SourceSpec: honest mode takes no channel or joint state");
      break;
    case SourceMode::iid_attack:
      if (!channel) throw std::invalid_argument("SourceSpec: iid_attack mode requires a channel");
      if (joint_state) throw std::invalid_argument("SourceSpec: iid_attack mode takes no joint state");
      break;
    case SourceMode::joint_attack:
      if (!joint_state) throw std::invalid_argument("SourceSpec: joint_attack mode requires a joint state");
      if (channel) throw std::invalid_argument("SourceSpec: joint_attack mode takes no channel");
      if (joint_state->dim() > kMaxJointDim)
        throw std::invalid_argument("SourceSpec: joint state dimension " + std::to_string(joint_state->dim()) +
                                    " exceeds the dense limit " + std::to_string(kMaxJointDim));
      joint_copy_count(joint_state->layout(), target);
      break;
  }
}

std::size_t DrawnCopies::count() const {
  if (joint) return joint->layout().size() / 4;
  return copies.size();
}

PreparedSource::PreparedSource(SourceSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  switch (spec_.mode) {
    case SourceMode::honest: copy_state_ = assemble_pdit(spec_.target); break;
    case SourceMode::iid_attack: copy_state_ = spec_.channel->apply(assemble_pdit(spec_.target)); break;
    case SourceMode::joint_attack: {
      joint_copies_ = joint_copy_count(spec_.joint_state->layout(), spec_.target);
      const auto first = CopyLabels::of_copy(0).all();
      copy_state_ = reduced_state(*spec_.joint_state, first).with_layout(spec_.target.layout());
      break;
    }
  }
}

DrawnCopies PreparedSource::draw(std::size_t n) const {
  if (n == 0) throw std::invalid_argument("draw_copies: n must be at least 1");
  DrawnCopies out;
  if (is_joint()) {
    if (n != joint_copies_)
      throw std::invalid_argument("draw_copies: joint state holds " + std::to_string(joint_copies_) +
                                  " copies but " + std::to_string(n) + " were requested");
    out.joint = *spec_.joint_state;
  } else {
    out.copies.assign(n, copy_state_);
  }
  return out;
}

DrawnCopies draw_copies(const SourceSpec& spec, std::size_t n, RngStream& /*rng*/) {
  // Preparation is deterministic for every supported mode; randomness enters
  // through the measurements downstream.
  return PreparedSource(spec).draw(n);
}

DensityMatrix joint_product(std::span<const DensityMatrix> copies) {
  if (copies.empty()) throw std::invalid_argument("joint_product: no copies");
  std::optional<DensityMatrix> acc;
  const auto base = CopyLabels::base().all();
  for (std::size_t i = 0; i < copies.size(); ++i) {
    const auto labels = CopyLabels::of_copy(i).all();
    std::vector<Subsystem> sys;
    for (std::size_t k = 0; k < 4; ++k) sys.push_back({labels[k], copies[i].layout().dim_of(base[k])});
    DensityMatrix ordered = reduced_state(copies[i], base).with_layout(SystemLayout(sys));
    acc = acc ? tensor(*acc, ordered) : ordered;
  }
  if (acc->dim() > kMaxJointDim)
    throw std::invalid_argument("joint_product: dimension " + std::to_string(acc->dim()) + " exceeds dense limit");
  return *acc;
}

}  // namespace pditqkd

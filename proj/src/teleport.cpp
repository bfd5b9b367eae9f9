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

#include "pditqkd/teleport.hpp"

#include <map>
#include <stdexcept>

#include "pditqkd/pdit.hpp"

namespace pditqkd {

std::size_t qubits_for(std::size_t dim) {
  if (dim == 0) throw std::invalid_argument("qubits_for: dimension must be positive");
  std::size_t q = 0;
  while ((std::size_t{1} << q) < dim) ++q;
  return q;
}

bool is_exact_ebit(const DensityMatrix& ebit) {
  if (ebit.dim() != 4) return false;
  static const Matrix target = max_entangled(2).matrix();
  return (ebit.matrix() - target).cwiseAbs().maxCoeff() <= 1e-14;
}

EbitPool::EbitPool(std::vector<DensityMatrix> ebits) : ebits_(std::move(ebits)) {}

std::vector<DensityMatrix> EbitPool::take(std::size_t count) {
  if (count > available())
    throw std::runtime_error("ebit pool exhausted: need " + std::to_string(count) + ", have " +
                             std::to_string(available()));
  std::vector<DensityMatrix> out(ebits_.begin() + static_cast<std::ptrdiff_t>(next_),
                                 ebits_.begin() + static_cast<std::ptrdiff_t>(next_ + count));
  next_ += count;
  return out;
}

std::vector<Matrix> teleport_branch_kraus(const DensityMatrix& resource, std::size_t outcome) {
  if (resource.dim() != 4 || resource.layout().size() != 2)
    throw std::invalid_argument("teleport: resource must be a two-qubit state");
  if (outcome > 3) throw std::invalid_argument("teleport: Bell outcome out of range");
  const std::size_t m1 = outcome / 2;
  const std::size_t m2 = outcome % 2;

  // Choi state of the branch: reference R entangled with the input S, then the
  // resource (Ae, Be). Factor order (R, S, Ae, Be).
  const Matrix phi = max_entangled(2).matrix();
  const Matrix state = ops::kron(phi, resource.matrix());
  Matrix cnot = Matrix::Zero(4, 4);
  cnot(0, 0) = cnot(1, 1) = cnot(2, 3) = cnot(3, 2) = 1.0;
  const Matrix bell = ops::kron(ops::hadamard(), ops::identity(2)) * cnot;
  const Matrix u = ops::kron(ops::kron(ops::identity(2), bell), ops::identity(2));
  const Matrix evolved = u * state * u.adjoint();

  Matrix choi(4, 4);
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t b = 0; b < 2; ++b)
      for (std::size_t r2 = 0; r2 < 2; ++r2)
        for (std::size_t b2 = 0; b2 < 2; ++b2) {
          const auto row = static_cast<Eigen::Index>(r * 8 + m1 * 4 + m2 * 2 + b);
          const auto col = static_cast<Eigen::Index>(r2 * 8 + m1 * 4 + m2 * 2 + b2);
          choi(static_cast<Eigen::Index>(r * 2 + b), static_cast<Eigen::Index>(r2 * 2 + b2)) = evolved(row, col);
        }
  Matrix correction = ops::identity(2);
  if (m2) correction = ops::pauli_x() * correction;
  if (m1) correction = correction * ops::pauli_z();
  const Matrix c = ops::kron(ops::identity(2), correction);
  choi = c * choi * c.adjoint();

  Eigen::SelfAdjointEigenSolver<Matrix> eig((choi + choi.adjoint()) / 2.0);
  std::vector<Matrix> kraus;
  for (Eigen::Index k = 0; k < 4; ++k) {
    const double lambda = eig.eigenvalues()(k);
    if (lambda <= kRankCutoff) continue;
    Matrix op(2, 2);
    for (Eigen::Index i = 0; i < 2; ++i)
      for (Eigen::Index o = 0; o < 2; ++o) op(o, i) = std::sqrt(2.0 * lambda) * eig.eigenvectors()(2 * i + o, k);
    kraus.push_back(std::move(op));
  }
  return kraus;
}

NoiseChannel teleport_channel(const DensityMatrix& resource, const std::string& target_label) {
  std::vector<Matrix> all;
  for (std::size_t m = 0; m < 4; ++m)
    for (auto& k : teleport_branch_kraus(resource, m)) all.push_back(std::move(k));
  return NoiseChannel(SystemLayout{{target_label, 2}}, std::move(all));
}

DensityMatrix teleport_subsystem(const DensityMatrix& rho, const std::string& label,
                                 std::span<const DensityMatrix> resource, RngStream& rng,
                                 std::optional<std::string> destination,
                                 std::vector<std::size_t>* bell_outcomes) {
  const std::size_t dim = rho.layout().dim_of(label);
  const std::size_t q = qubits_for(dim);
  if (resource.size() < q)
    throw std::invalid_argument("teleport_subsystem: " + label + " needs " + std::to_string(q) + " ebits, got " +
                                std::to_string(resource.size()));
  bool exact = true;
  for (std::size_t j = 0; j < q; ++j) exact = exact && is_exact_ebit(resource[j]);

  DensityMatrix out = rho;
  if (!exact) {
    if ((std::size_t{1} << q) != dim)
      throw std::invalid_argument("teleport_subsystem: noisy teleportation of " + label +
                                  " requires a power-of-two dimension, got " + std::to_string(dim));
    // Split the subsystem into its qubits (most significant first).
    std::vector<Subsystem> split;
    LabelList qubit_labels;
    for (const auto& s : rho.layout().systems()) {
      if (s.label != label) {
        split.push_back(s);
        continue;
      }
      for (std::size_t j = 0; j < q; ++j) {
        qubit_labels.push_back(label + "/q" + std::to_string(j));
        split.push_back({qubit_labels.back(), 2});
      }
    }
    out = out.with_layout(SystemLayout(split));
    for (std::size_t j = 0; j < q; ++j) {
      const LabelList target{qubit_labels[j]};
      const Matrix local = reduced_state(out, target).matrix();
      std::vector<std::vector<Matrix>> branches;
      std::vector<double> probs;
      for (std::size_t m = 0; m < 4; ++m) {
        branches.push_back(teleport_branch_kraus(resource[j], m));
        double p = 0.0;
        for (const auto& k : branches.back()) p += (k * local * k.adjoint()).trace().real();
        probs.push_back(std::max(p, 0.0));
      }
      const std::size_t m = rng.sample_index(probs);
      if (bell_outcomes) bell_outcomes->push_back(m);
      out = DensityMatrix::trusted(out.layout(), kraus_branch(out, branches[m], target) / probs[m]);
    }
    out = out.with_layout(rho.layout());
  }
  if (destination && *destination != label) out = out.relabeled(label, *destination);
  return out;
}

LoChauReport lo_chau_test(std::span<const DensityMatrix> candidates, std::size_t t, double epsilon, RngStream& rng) {
  if (t > candidates.size())
    throw std::invalid_argument("lo_chau_verify: t = " + std::to_string(t) + " exceeds " +
                                std::to_string(candidates.size()) + " candidates");
  static const Matrix xx = ops::kron(ops::pauli_x(), ops::pauli_x());
  static const Matrix zz = ops::kron(ops::pauli_z(), ops::pauli_z());
  std::map<std::pair<const void*, char>, double> fail_prob;
  auto failure_probability = [&](const DensityMatrix& c, char basis) {
    auto key = std::make_pair(c.storage_id(), basis);
    auto it = fail_prob.find(key);
    if (it != fail_prob.end()) return it->second;
    const auto labels = c.layout().labels();
    const double e = expectation(c, basis == 'X' ? xx : zz, labels);
    const double p = std::clamp((1.0 - e) / 2.0, 0.0, 1.0);
    fail_prob.emplace(key, p);
    return p;
  };

  LoChauReport report;
  report.tested = rng.choose(candidates.size(), t);
  for (std::size_t idx : report.tested) {
    const char basis = rng.bernoulli(0.5) ? 'X' : 'Z';
    const bool failed = rng.bernoulli(failure_probability(candidates[idx], basis));
    report.basis.push_back(basis);
    report.failed.push_back(failed);
    if (failed) ++report.errors;
  }
  report.passed = 2.0 * static_cast<double>(report.errors) <= epsilon * static_cast<double>(t);
  return report;
}

bool lo_chau_verify(std::span<const DensityMatrix> candidates, std::size_t t, double epsilon, RngStream& rng) {
  return lo_chau_test(candidates, t, epsilon, rng).passed;
}

DistillResult partial_distill(std::size_t k, std::size_t ebits_needed, std::size_t t, double epsilon,
                              double fidelity, RngStream& rng, Transcript* transcript) {
  if (k == 0) throw std::invalid_argument("partial_distill: no copies available for distillation");
  auto candidates = ebit_source(fidelity, ebits_needed + t, rng);
  DistillResult result;
  result.verification = lo_chau_test(candidates, t, epsilon, rng);
  result.verified = result.verification.passed;

  std::vector<bool> tested(candidates.size(), false);
  for (std::size_t i : result.verification.tested) tested[i] = true;
  std::vector<DensityMatrix> kept;
  kept.reserve(ebits_needed);
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (!tested[i]) kept.push_back(candidates[i]);
  result.pool = EbitPool(std::move(kept));

  note(transcript, "distill", "candidates", {{"copies", k}, {"candidates", candidates.size()}});
  Json failed = Json::array();
  std::string bases;
  for (std::size_t i = 0; i < result.verification.tested.size(); ++i) {
    bases.push_back(result.verification.basis[i]);
    failed.push_back(result.verification.failed[i] ? 1 : 0);
  }
  note(transcript, "distill", "verify",
       {{"tested", result.verification.tested},
        {"bases", bases},
        {"failed", failed},
        {"errors", result.verification.errors},
        {"passed", result.verified}});
  return result;
}

}  // namespace pditqkd

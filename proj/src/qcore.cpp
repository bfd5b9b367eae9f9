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

#include "pditqkd/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace pditqkd {

namespace {

void validate_systems(const std::vector<Subsystem>& systems) {
  std::unordered_set<std::string> seen;
  for (const auto& s : systems) {
    if (s.label.empty()) throw std::invalid_argument("SystemLayout: empty subsystem label");
    if (s.dim < 1) throw std::invalid_argument("SystemLayout: subsystem '" + s.label + "' has dimension 0");
    if (!seen.insert(s.label).second)
      throw std::invalid_argument("SystemLayout: duplicate label '" + s.label + "'");
  }
}

std::vector<std::size_t> strides_of(const SystemLayout& layout) {
  const auto& sys = layout.systems();
  std::vector<std::size_t> strides(sys.size(), 1);
  for (std::size_t p = sys.size(); p-- > 1;) strides[p - 1] = strides[p] * sys[p].dim;
  return strides;
}

// Offsets into the full basis contributed by a subset of factor positions,
// enumerated row-major over those positions. A full basis index is the sum of
// the offsets of any partition of the positions.
std::vector<std::size_t> offsets_for(const SystemLayout& layout, std::span<const std::size_t> positions) {
  const auto strides = strides_of(layout);
  std::vector<std::size_t> offsets{0};
  for (std::size_t p : positions) {
    const std::size_t d = layout.systems()[p].dim;
    std::vector<std::size_t> next;
    next.reserve(offsets.size() * d);
    for (std::size_t base : offsets)
      for (std::size_t digit = 0; digit < d; ++digit) next.push_back(base + digit * strides[p]);
    offsets = std::move(next);
  }
  return offsets;
}

std::vector<std::size_t> positions_of(const SystemLayout& layout, std::span<const std::string> labels) {
  std::vector<std::size_t> pos;
  pos.reserve(labels.size());
  std::unordered_set<std::size_t> seen;
  for (const auto& l : labels) {
    const std::size_t p = layout.index_of(l);
    if (!seen.insert(p).second) throw std::invalid_argument("repeated subsystem label '" + l + "'");
    pos.push_back(p);
  }
  return pos;
}

std::vector<std::size_t> complement(const SystemLayout& layout, std::span<const std::size_t> positions) {
  std::vector<std::size_t> rest;
  for (std::size_t p = 0; p < layout.size(); ++p)
    if (std::find(positions.begin(), positions.end(), p) == positions.end()) rest.push_back(p);
  return rest;
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

void check_hermitian_trace(const Matrix& m, std::size_t dim) {
  if (static_cast<std::size_t>(m.rows()) != dim || static_cast<std::size_t>(m.cols()) != dim)
    throw std::invalid_argument("DensityMatrix: matrix size does not match layout dimension");
  if (!m.allFinite()) throw std::invalid_argument("DensityMatrix: non-finite entries");
  const double herm = max_abs(m - m.adjoint());
  if (herm > kHermitianTol) {
    std::ostringstream os;
    os << "DensityMatrix: not Hermitian (max |M - M^dagger| = " << herm << ")";
    throw std::invalid_argument(os.str());
  }
  const Complex tr = m.trace();
  if (std::abs(tr - Complex(1.0, 0.0)) > kTraceTol) {
    std::ostringstream os;
    os << "DensityMatrix: trace " << tr.real() << " differs from 1";
    throw std::invalid_argument(os.str());
  }
}

Matrix symmetrized(const Matrix& m) { return (m + m.adjoint()) * 0.5; }

// op acting on the least-significant factors (dimension dt) of a D x D matrix:
// returns (op (x) I_rest) * m.
Matrix left_apply_trailing(const Matrix& m, const Matrix& op) {
  const Eigen::Index D = m.rows();
  const Eigen::Index dt = op.rows();
  const Eigen::Index cols = (D / dt) * D;
  Matrix out(D, D);
  Eigen::Map<const Matrix> in_view(m.data(), dt, cols);
  Eigen::Map<Matrix> out_view(out.data(), dt, cols);
  out_view.noalias() = op * in_view;
  return out;
}

// Positions ordering that moves `targets` (in the given order) to the end.
std::vector<std::size_t> targets_last_order(const SystemLayout& layout, std::span<const std::size_t> targets) {
  auto order = complement(layout, targets);
  order.insert(order.end(), targets.begin(), targets.end());
  return order;
}

bool is_identity_order(std::span<const std::size_t> order) {
  for (std::size_t k = 0; k < order.size(); ++k)
    if (order[k] != k) return false;
  return true;
}

std::vector<std::size_t> inverse_order(std::span<const std::size_t> order) {
  std::vector<std::size_t> inv(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) inv[order[k]] = k;
  return inv;
}

// Applies fn(matrix with targets as trailing factors) and restores the layout.
template <typename Fn>
Matrix with_targets_trailing(const DensityMatrix& rho, std::span<const std::size_t> targets, Fn&& fn) {
  const auto dims = rho.layout().dims();
  const auto order = targets_last_order(rho.layout(), targets);
  if (is_identity_order(order)) return fn(rho.matrix());
  Matrix moved = permute_factors(rho.matrix(), dims, order);
  std::vector<std::size_t> moved_dims(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) moved_dims[k] = dims[order[k]];
  Matrix result = fn(moved);
  return permute_factors(result, moved_dims, inverse_order(order));
}

std::size_t product_of_dims(const SystemLayout& layout, std::span<const std::size_t> positions) {
  std::size_t d = 1;
  for (std::size_t p : positions) d *= layout.systems()[p].dim;
  return d;
}

}  // namespace

// ---------------------------------------------------------------------------
// SystemLayout

SystemLayout::SystemLayout(std::vector<Subsystem> systems) : systems_(std::move(systems)) {
  validate_systems(systems_);
  for (const auto& s : systems_) total_dim_ *= s.dim;
}

SystemLayout::SystemLayout(std::initializer_list<Subsystem> systems)
    : SystemLayout(std::vector<Subsystem>(systems)) {}

std::optional<std::size_t> SystemLayout::find(std::string_view label) const {
  for (std::size_t i = 0; i < systems_.size(); ++i)
    if (systems_[i].label == label) return i;
  return std::nullopt;
}

std::size_t SystemLayout::index_of(std::string_view label) const {
  auto p = find(label);
  if (!p) throw std::invalid_argument("unknown subsystem label '" + std::string(label) + "' in layout " + describe());
  return *p;
}

std::size_t SystemLayout::dim_of(std::string_view label) const { return systems_[index_of(label)].dim; }

LabelList SystemLayout::labels() const {
  LabelList out;
  for (const auto& s : systems_) out.push_back(s.label);
  return out;
}

std::vector<std::size_t> SystemLayout::dims() const {
  std::vector<std::size_t> out;
  for (const auto& s : systems_) out.push_back(s.dim);
  return out;
}

SystemLayout SystemLayout::concat(const SystemLayout& other) const {
  auto all = systems_;
  all.insert(all.end(), other.systems_.begin(), other.systems_.end());
  return SystemLayout(std::move(all));
}

SystemLayout SystemLayout::select(std::span<const std::string> labels) const {
  std::vector<Subsystem> out;
  for (const auto& l : labels) out.push_back(systems_[index_of(l)]);
  return SystemLayout(std::move(out));
}

SystemLayout SystemLayout::without(std::span<const std::string> labels) const {
  for (const auto& l : labels) index_of(l);
  std::vector<Subsystem> out;
  for (const auto& s : systems_)
    if (std::find(labels.begin(), labels.end(), s.label) == labels.end()) out.push_back(s);
  return SystemLayout(std::move(out));
}

SystemLayout SystemLayout::relabeled(std::string_view from, std::string to) const {
  auto out = systems_;
  out[index_of(from)].label = std::move(to);
  return SystemLayout(std::move(out));
}

std::string SystemLayout::describe() const {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < systems_.size(); ++i) {
    if (i) os << ",";
    os << systems_[i].label << ":" << systems_[i].dim;
  }
  os << ")";
  return os.str();
}

// ---------------------------------------------------------------------------
// DensityMatrix

DensityMatrix::DensityMatrix() : entries_(std::make_shared<const Matrix>(Matrix::Ones(1, 1))) {}

DensityMatrix::DensityMatrix(SystemLayout layout, std::shared_ptr<const Matrix> entries)
    : layout_(std::move(layout)), entries_(std::move(entries)) {}

DensityMatrix::DensityMatrix(SystemLayout layout, Matrix entries) : layout_(std::move(layout)) {
  check_hermitian_trace(entries, layout_.total_dim());
  Matrix sym = symmetrized(entries);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
  const double min_eig = solver.eigenvalues().minCoeff();
  if (min_eig < -kPsdTol) {
    std::ostringstream os;
    os << "DensityMatrix: not positive semidefinite (min eigenvalue " << min_eig << ")";
    throw std::invalid_argument(os.str());
  }
  entries_ = std::make_shared<const Matrix>(std::move(sym));
}

DensityMatrix DensityMatrix::trusted(SystemLayout layout, Matrix entries) {
  check_hermitian_trace(entries, layout.total_dim());
  return DensityMatrix(std::move(layout), std::make_shared<const Matrix>(symmetrized(entries)));
}

DensityMatrix DensityMatrix::from_noisy(SystemLayout layout, const Matrix& entries) {
  if (static_cast<std::size_t>(entries.rows()) != layout.total_dim() || entries.rows() != entries.cols())
    throw std::invalid_argument("from_noisy: matrix size does not match layout dimension");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrized(entries));
  Eigen::VectorXd eig = solver.eigenvalues();
  const double min_eig = eig.minCoeff();
  if (min_eig < -kMaxClip) {
    std::ostringstream os;
    os << "from_noisy: eigenvalue " << min_eig << " is beyond the clipping budget";
    throw std::invalid_argument(os.str());
  }
  eig = eig.cwiseMax(0.0);
  const double total = eig.sum();
  if (!(total > 0.0)) throw std::invalid_argument("from_noisy: operator has no positive part");
  eig /= total;
  Matrix rebuilt = solver.eigenvectors() * eig.cast<Complex>().asDiagonal() * solver.eigenvectors().adjoint();
  return DensityMatrix(std::move(layout), std::make_shared<const Matrix>(symmetrized(rebuilt)));
}

DensityMatrix DensityMatrix::pure(SystemLayout layout, const Vector& amplitudes) {
  if (static_cast<std::size_t>(amplitudes.size()) != layout.total_dim())
    throw std::invalid_argument("DensityMatrix::pure: amplitude count does not match layout");
  const double norm = amplitudes.norm();
  if (!(norm > 0.0)) throw std::invalid_argument("DensityMatrix::pure: zero vector");
  Vector v = amplitudes / norm;
  Matrix m = v * v.adjoint();
  return DensityMatrix(std::move(layout), std::make_shared<const Matrix>(symmetrized(m)));
}

DensityMatrix DensityMatrix::basis_state(SystemLayout layout, std::span<const std::size_t> digits) {
  const auto dims = layout.dims();
  if (digits.size() != dims.size()) throw std::invalid_argument("basis_state: wrong number of digits");
  for (std::size_t i = 0; i < dims.size(); ++i)
    if (digits[i] >= dims[i]) throw std::invalid_argument("basis_state: digit out of range");
  const std::size_t idx = index_of_digits(digits, dims);
  Matrix m = Matrix::Zero(layout.total_dim(), layout.total_dim());
  m(idx, idx) = 1.0;
  return DensityMatrix(std::move(layout), std::make_shared<const Matrix>(std::move(m)));
}

DensityMatrix DensityMatrix::maximally_mixed(SystemLayout layout) {
  const auto D = static_cast<Eigen::Index>(layout.total_dim());
  Matrix m = Matrix::Identity(D, D) / static_cast<double>(D);
  return DensityMatrix(std::move(layout), std::make_shared<const Matrix>(std::move(m)));
}

DensityMatrix DensityMatrix::relabeled(std::string_view from, std::string to) const {
  return DensityMatrix(layout_.relabeled(from, std::move(to)), entries_);
}

DensityMatrix DensityMatrix::with_layout(SystemLayout layout) const {
  if (layout.dims() != layout_.dims())
    throw std::invalid_argument("with_layout: dimensions " + layout.describe() + " do not match " + layout_.describe());
  return DensityMatrix(std::move(layout), entries_);
}

// ---------------------------------------------------------------------------
// UnitaryOp

UnitaryOp::UnitaryOp(SystemLayout layout, Matrix entries) : layout_(std::move(layout)), entries_(std::move(entries)) {
  const auto D = static_cast<Eigen::Index>(layout_.total_dim());
  if (entries_.rows() != D || entries_.cols() != D)
    throw std::invalid_argument("UnitaryOp: matrix size does not match layout " + layout_.describe());
  const double dev = max_abs(entries_ * entries_.adjoint() - Matrix::Identity(D, D));
  if (dev > kUnitaryTol) {
    std::ostringstream os;
    os << "UnitaryOp: not unitary (max |U U^dagger - I| = " << dev << ")";
    throw std::invalid_argument(os.str());
  }
}

UnitaryOp UnitaryOp::identity(SystemLayout layout) {
  const auto D = static_cast<Eigen::Index>(layout.total_dim());
  return UnitaryOp(std::move(layout), Matrix::Identity(D, D));
}

UnitaryOp UnitaryOp::adjoint() const { return UnitaryOp(layout_, entries_.adjoint()); }

// ---------------------------------------------------------------------------
// Index helpers

std::vector<std::size_t> digits_of(std::size_t index, std::span<const std::size_t> dims) {
  std::vector<std::size_t> digits(dims.size());
  for (std::size_t p = dims.size(); p-- > 0;) {
    digits[p] = index % dims[p];
    index /= dims[p];
  }
  return digits;
}

std::size_t index_of_digits(std::span<const std::size_t> digits, std::span<const std::size_t> dims) {
  std::size_t idx = 0;
  for (std::size_t p = 0; p < dims.size(); ++p) idx = idx * dims[p] + digits[p];
  return idx;
}

Matrix permute_factors(const Matrix& op, std::span<const std::size_t> dims, std::span<const std::size_t> order) {
  if (order.size() != dims.size()) throw std::invalid_argument("permute_factors: order size mismatch");
  std::vector<Subsystem> sys;
  for (std::size_t k = 0; k < dims.size(); ++k) sys.push_back({"f" + std::to_string(k), dims[k]});
  const SystemLayout old_layout(sys);
  // Offsets of the new row-major enumeration expressed in old strides.
  const std::vector<std::size_t> order_vec(order.begin(), order.end());
  const auto map = offsets_for(old_layout, order_vec);
  const auto D = static_cast<Eigen::Index>(map.size());
  Matrix out(D, D);
  for (Eigen::Index c = 0; c < D; ++c)
    for (Eigen::Index r = 0; r < D; ++r) out(r, c) = op(map[r], map[c]);
  return out;
}

// ---------------------------------------------------------------------------
// Operations

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  SystemLayout layout = a.layout().concat(b.layout());  // throws on label collision
  const auto& A = a.matrix();
  const auto& B = b.matrix();
  return DensityMatrix::trusted(std::move(layout), ops::kron(A, B));
}

DensityMatrix reduced_state(const DensityMatrix& rho, std::span<const std::string> labels) {
  const auto& layout = rho.layout();
  const auto keep = positions_of(layout, labels);
  const auto rest = complement(layout, keep);
  const auto ko = offsets_for(layout, keep);
  const auto to = offsets_for(layout, rest);
  const auto& M = rho.matrix();
  const auto dk = static_cast<Eigen::Index>(ko.size());
  Matrix out = Matrix::Zero(dk, dk);
  for (Eigen::Index c = 0; c < dk; ++c)
    for (Eigen::Index r = 0; r < dk; ++r) {
      Complex acc = 0.0;
      for (std::size_t t : to) acc += M(ko[r] + t, ko[c] + t);
      out(r, c) = acc;
    }
  return DensityMatrix::trusted(layout.select(labels), std::move(out));
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::string> keep) {
  LabelList ordered;
  for (const auto& s : rho.layout().systems())
    if (std::find(keep.begin(), keep.end(), s.label) != keep.end()) ordered.push_back(s.label);
  for (const auto& l : keep) rho.layout().index_of(l);
  return reduced_state(rho, ordered);
}

DensityMatrix apply_unitary(const DensityMatrix& rho, const UnitaryOp& u, std::span<const std::string> targets) {
  const auto& layout = rho.layout();
  const auto pos = positions_of(layout, targets);
  const auto target_dims = layout.select(targets).dims();
  if (target_dims != u.layout().dims())
    throw std::invalid_argument("apply_unitary: operator layout " + u.layout().describe() +
                                " does not match targets " + layout.select(targets).describe());
  Matrix out = with_targets_trailing(rho, pos, [&](const Matrix& m) {
    Matrix x = left_apply_trailing(m, u.matrix());
    Matrix y = x.adjoint();
    return left_apply_trailing(y, u.matrix());
  });
  return DensityMatrix::trusted(layout, std::move(out));
}

DensityMatrix apply_unitary(const DensityMatrix& rho, const UnitaryOp& u) {
  const auto labels = u.layout().labels();
  return apply_unitary(rho, u, labels);
}

Matrix kraus_branch(const DensityMatrix& rho, std::span<const Matrix> kraus, std::span<const std::string> targets) {
  const auto& layout = rho.layout();
  const auto pos = positions_of(layout, targets);
  const auto dt = static_cast<Eigen::Index>(product_of_dims(layout, pos));
  for (const auto& k : kraus)
    if (k.rows() != dt || k.cols() != dt) throw std::invalid_argument("apply_kraus: Kraus operator dimension mismatch");
  Matrix out = with_targets_trailing(rho, pos, [&](const Matrix& m) {
    Matrix acc = Matrix::Zero(m.rows(), m.cols());
    for (const auto& k : kraus) {
      Matrix x = left_apply_trailing(m, k);
      Matrix y = x.adjoint();
      acc += left_apply_trailing(y, k);
    }
    return acc;
  });
  return out;
}

DensityMatrix apply_kraus(const DensityMatrix& rho, std::span<const Matrix> kraus, std::span<const std::string> targets) {
  return DensityMatrix::trusted(rho.layout(), kraus_branch(rho, kraus, targets));
}

std::vector<double> computational_probabilities(const DensityMatrix& rho, std::span<const std::string> targets) {
  const auto& layout = rho.layout();
  const auto pos = positions_of(layout, targets);
  const auto ko = offsets_for(layout, pos);
  const auto to = offsets_for(layout, complement(layout, pos));
  const auto& M = rho.matrix();
  std::vector<double> probs(ko.size(), 0.0);
  for (std::size_t k = 0; k < ko.size(); ++k) {
    double acc = 0.0;
    for (std::size_t t : to) acc += M(ko[k] + t, ko[k] + t).real();
    probs[k] = std::max(acc, 0.0);
  }
  return probs;
}

Matrix conditional_block(const DensityMatrix& rho, std::span<const std::string> targets,
                         std::span<const std::size_t> outcome) {
  const auto& layout = rho.layout();
  const auto pos = positions_of(layout, targets);
  if (outcome.size() != pos.size()) throw std::invalid_argument("conditional_block: outcome size mismatch");
  const auto strides = strides_of(layout);
  std::size_t fixed = 0;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    if (outcome[i] >= layout.systems()[pos[i]].dim) throw std::invalid_argument("conditional_block: digit out of range");
    fixed += outcome[i] * strides[pos[i]];
  }
  const auto ro = offsets_for(layout, complement(layout, pos));
  const auto& M = rho.matrix();
  const auto dr = static_cast<Eigen::Index>(ro.size());
  Matrix block(dr, dr);
  for (Eigen::Index c = 0; c < dr; ++c)
    for (Eigen::Index r = 0; r < dr; ++r) block(r, c) = M(fixed + ro[r], fixed + ro[c]);
  return block;
}

Measurement measure_computational(const DensityMatrix& rho, std::span<const std::string> targets, RngStream& rng) {
  if (targets.empty()) throw std::invalid_argument("measure_computational: no targets");
  const auto probs = computational_probabilities(rho, targets);
  const std::size_t idx = rng.sample_index(probs);
  const auto target_dims = rho.layout().select(targets).dims();
  auto outcome = digits_of(idx, target_dims);
  Matrix block = conditional_block(rho, targets, outcome);
  const double p = block.trace().real();
  block /= p;
  return Measurement{std::move(outcome), DensityMatrix::trusted(rho.layout().without(targets), std::move(block)),
                     p};
}

double expectation(const DensityMatrix& rho, const Matrix& observable, std::span<const std::string> targets) {
  const double herm = max_abs(observable - observable.adjoint());
  if (herm > kHermitianTol) throw std::invalid_argument("expectation: observable is not Hermitian");
  const auto reduced = reduced_state(rho, targets);
  if (observable.rows() != static_cast<Eigen::Index>(reduced.dim()) || observable.cols() != observable.rows())
    throw std::invalid_argument("expectation: observable dimension does not match targets");
  return (reduced.matrix() * observable).trace().real();
}

DensityMatrix purify(const DensityMatrix& rho, std::string eve_label) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(rho.matrix());
  const auto& eig = solver.eigenvalues();
  std::vector<Eigen::Index> kept;
  for (Eigen::Index k = eig.size(); k-- > 0;)
    if (eig(k) > kRankCutoff) kept.push_back(k);
  const auto r = static_cast<Eigen::Index>(kept.size());
  const auto D = static_cast<Eigen::Index>(rho.dim());
  Vector psi = Vector::Zero(D * r);
  for (Eigen::Index e = 0; e < r; ++e) {
    const double w = std::sqrt(eig(kept[e]));
    for (Eigen::Index s = 0; s < D; ++s) psi(s * r + e) = w * solver.eigenvectors()(s, kept[e]);
  }
  SystemLayout eve({Subsystem{std::move(eve_label), static_cast<std::size_t>(r)}});
  return DensityMatrix::pure(rho.layout().concat(eve), psi);
}

Matrix partial_transpose(const DensityMatrix& rho, std::span<const std::string> labels) {
  const auto& layout = rho.layout();
  const auto pos = positions_of(layout, labels);
  const auto po = offsets_for(layout, pos);
  const auto ro = offsets_for(layout, complement(layout, pos));
  const auto& M = rho.matrix();
  Matrix out(M.rows(), M.cols());
  for (std::size_t a = 0; a < po.size(); ++a)
    for (std::size_t c = 0; c < po.size(); ++c)
      for (std::size_t e = 0; e < ro.size(); ++e)
        for (std::size_t b = 0; b < ro.size(); ++b) out(po[c] + ro[b], po[a] + ro[e]) = M(po[a] + ro[b], po[c] + ro[e]);
  return out;
}

double hermitian_trace_norm(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrized(m), Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().sum();
}

Eigen::VectorXd spectrum(const DensityMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(rho.matrix(), Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (!(rho.layout() == sigma.layout()))
    throw std::invalid_argument("trace_distance: layouts " + rho.layout().describe() + " and " +
                                sigma.layout().describe() + " differ");
  return std::clamp(0.5 * hermitian_trace_norm(rho.matrix() - sigma.matrix()), 0.0, 1.0);
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (!(rho.layout() == sigma.layout()))
    throw std::invalid_argument("fidelity: layouts " + rho.layout().describe() + " and " + sigma.layout().describe() +
                                " differ");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(rho.matrix());
  const Eigen::VectorXd roots = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Matrix sqrt_rho = solver.eigenvectors() * roots.cast<Complex>().asDiagonal() * solver.eigenvectors().adjoint();
  const Matrix inner = sqrt_rho * sigma.matrix() * sqrt_rho;
  Eigen::SelfAdjointEigenSolver<Matrix> inner_solver(symmetrized(inner), Eigen::EigenvaluesOnly);
  const double root_trace = inner_solver.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return std::clamp(root_trace * root_trace, 0.0, 1.0);
}

double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("binary_entropy: argument outside [0, 1]");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

// ---------------------------------------------------------------------------
// Standard operators

namespace ops {

Matrix identity(std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  return Matrix::Identity(d, d);
}

Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Matrix pauli_y() {
  Matrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

Matrix hadamard() {
  Matrix m(2, 2);
  m << 1, 1, 1, -1;
  return m / std::sqrt(2.0);
}

Matrix shift(std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d);
  Matrix m = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) m((j + 1) % n, j) = 1.0;
  return m;
}

Matrix clock(std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d);
  Matrix m = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) m(j, j) = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(d));
  return m;
}

Matrix fourier(std::size_t d) {
  if (d == 2) return hadamard();
  const auto n = static_cast<Eigen::Index>(d);
  Matrix m(n, n);
  const double norm = 1.0 / std::sqrt(static_cast<double>(d));
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c)
      m(r, c) = std::polar(norm, 2.0 * std::numbers::pi * static_cast<double>((r * c) % n) / static_cast<double>(d));
  return m;
}

Matrix swap(std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d);
  Matrix m = Matrix::Zero(n * n, n * n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) m(b * n + a, a * n + b) = 1.0;
  return m;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix random_unitary(std::size_t dim, RngStream& rng) {
  const auto n = static_cast<Eigen::Index>(dim);
  Matrix g(n, n);
  for (Eigen::Index c = 0; c < n; ++c)
    for (Eigen::Index r = 0; r < n; ++r) g(r, c) = Complex(rng.normal(), rng.normal()) / std::sqrt(2.0);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix& rr = qr.matrixQR();
  for (Eigen::Index j = 0; j < n; ++j) {
    const Complex diag = rr(j, j);
    const double mag = std::abs(diag);
    if (mag > 0.0) q.col(j) *= diag / mag;
  }
  return q;
}

}  // namespace ops

DensityMatrix random_density_matrix(SystemLayout layout, RngStream& rng, std::size_t rank) {
  const auto D = static_cast<Eigen::Index>(layout.total_dim());
  const auto r = static_cast<Eigen::Index>(rank == 0 ? layout.total_dim() : rank);
  Matrix g(D, r);
  for (Eigen::Index c = 0; c < r; ++c)
    for (Eigen::Index i = 0; i < D; ++i) g(i, c) = Complex(rng.normal(), rng.normal());
  Matrix m = g * g.adjoint();
  m /= m.trace().real();
  return DensityMatrix(std::move(layout), std::move(m));
}

}  // namespace pditqkd

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

#include "pditqkd/pdit.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pditqkd {

namespace {

double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

void require_key_dim(std::size_t d, const char* where) {
  if (d < 2) throw std::invalid_argument(std::string(where) + ": key dimension must be at least 2");
}

}  // namespace

CopyLabels CopyLabels::of_copy(std::size_t index) {
  const std::string suffix = "#" + std::to_string(index);
  return CopyLabels{kKeyA + suffix, kKeyB + suffix, kShieldA + suffix, kShieldB + suffix};
}

// ---------------------------------------------------------------------------
// PditSpec

SystemLayout PditSpec::key_layout() const { return SystemLayout{{kKeyA, key_dim}, {kKeyB, key_dim}}; }

SystemLayout PditSpec::shield_layout() const {
  return SystemLayout{{kShieldA, shield_dim_a}, {kShieldB, shield_dim_b}};
}

SystemLayout PditSpec::layout() const { return key_layout().concat(shield_layout()); }

void PditSpec::validate() const {
  require_key_dim(key_dim, "PditSpec");
  if (shield_dim_a < 1 || shield_dim_b < 1) throw std::invalid_argument("PditSpec: shield dimensions must be >= 1");
  if (twist_unitaries.size() != key_dim) {
    std::ostringstream os;
    os << "PditSpec: expected " << key_dim << " twisting unitaries, got " << twist_unitaries.size();
    throw std::invalid_argument(os.str());
  }
  const auto dims = shield_layout().dims();
  for (std::size_t i = 0; i < twist_unitaries.size(); ++i)
    if (twist_unitaries[i].layout().dims() != dims)
      throw std::invalid_argument("PditSpec: twisting unitary " + std::to_string(i) + " has layout " +
                                  twist_unitaries[i].layout().describe() + ", expected " +
                                  shield_layout().describe());
  if (shield.layout().dims() != dims)
    throw std::invalid_argument("PditSpec: shield state has layout " + shield.layout().describe() + ", expected " +
                                shield_layout().describe());
}

DensityMatrix CcqState::eve_marginal() const {
  Matrix acc;
  SystemLayout layout;
  for (std::size_t i = 0; i < key_dim; ++i)
    for (std::size_t j = 0; j < key_dim; ++j) {
      const auto& st = eve_state(i, j);
      if (!st) continue;
      if (acc.size() == 0) {
        acc = Matrix::Zero(st->matrix().rows(), st->matrix().cols());
        layout = st->layout();
      }
      acc += probs(i, j) * st->matrix();
    }
  if (acc.size() == 0) throw std::invalid_argument("CcqState: no Eve conditionals");
  acc /= acc.trace().real();
  return DensityMatrix::trusted(layout, std::move(acc));
}

// ---------------------------------------------------------------------------
// Construction

DensityMatrix max_entangled(std::size_t d) {
  require_key_dim(d, "max_entangled");
  Vector psi = Vector::Zero(static_cast<Eigen::Index>(d * d));
  for (std::size_t i = 0; i < d; ++i) psi(static_cast<Eigen::Index>(i * d + i)) = 1.0;
  return DensityMatrix::pure(SystemLayout{{kKeyA, d}, {kKeyB, d}}, psi);
}

DensityMatrix assemble_pdit(const PditSpec& spec) {
  spec.validate();
  const std::size_t d = spec.key_dim;
  const auto ds = static_cast<Eigen::Index>(spec.shield_dim_a * spec.shield_dim_b);
  const auto D = static_cast<Eigen::Index>(d * d) * ds;
  std::vector<Matrix> twisted;  // U_i rho
  for (const auto& u : spec.twist_unitaries) twisted.push_back(u.matrix() * spec.shield.matrix());
  Matrix m = Matrix::Zero(D, D);
  const double inv_d = 1.0 / static_cast<double>(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const auto row = static_cast<Eigen::Index>(i * d + i) * ds;
      const auto col = static_cast<Eigen::Index>(j * d + j) * ds;
      m.block(row, col, ds, ds) = inv_d * twisted[i] * spec.twist_unitaries[j].matrix().adjoint();
    }
  return DensityMatrix(spec.layout(), std::move(m));
}

UnitaryOp untwist_local(const PditSpec& spec) {
  spec.validate();
  const std::size_t d = spec.key_dim;
  const auto ds = static_cast<Eigen::Index>(spec.shield_dim_a * spec.shield_dim_b);
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(d) * ds, static_cast<Eigen::Index>(d) * ds);
  for (std::size_t i = 0; i < d; ++i) {
    const auto off = static_cast<Eigen::Index>(i) * ds;
    m.block(off, off, ds, ds) = spec.twist_unitaries[i].matrix().adjoint();
  }
  return UnitaryOp(SystemLayout{{kKeyB, d}}.concat(spec.shield_layout()), std::move(m));
}

TwistTable default_twist_table(const PditSpec& spec) {
  spec.validate();
  TwistTable table;
  for (std::size_t i = 0; i < spec.key_dim; ++i) {
    std::vector<UnitaryOp> row;
    for (std::size_t j = 0; j < spec.key_dim; ++j)
      row.push_back(i == j ? spec.twist_unitaries[i] : UnitaryOp::identity(spec.shield_layout()));
    table.push_back(std::move(row));
  }
  return table;
}

UnitaryOp untwist_global(const PditSpec& spec, const TwistTable& table) {
  spec.validate();
  const std::size_t d = spec.key_dim;
  if (table.size() != d) throw std::invalid_argument("untwist_global: table must have key_dim rows");
  const auto dims = spec.shield_layout().dims();
  const auto ds = static_cast<Eigen::Index>(spec.shield_dim_a * spec.shield_dim_b);
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(d * d) * ds, static_cast<Eigen::Index>(d * d) * ds);
  for (std::size_t i = 0; i < d; ++i) {
    if (table[i].size() != d) throw std::invalid_argument("untwist_global: table must be key_dim x key_dim");
    for (std::size_t j = 0; j < d; ++j) {
      const auto& u = table[i][j];
      if (u.layout().dims() != dims)
        throw std::invalid_argument("untwist_global: table entry has layout " + u.layout().describe());
      if (i == j && max_abs_diff(u.matrix(), spec.twist_unitaries[i].matrix()) > kUnitaryTol)
        throw std::invalid_argument("untwist_global: diagonal entry " + std::to_string(i) +
                                    " differs from the PditSpec twisting unitary");
      const auto off = static_cast<Eigen::Index>(i * d + j) * ds;
      m.block(off, off, ds, ds) = u.matrix().adjoint();
    }
  }
  return UnitaryOp(spec.layout(), std::move(m));
}

DensityMatrix basic_pdit(const PditSpec& spec) {
  spec.validate();
  return tensor(max_entangled(spec.key_dim), spec.shield.with_layout(spec.shield_layout()));
}

// ---------------------------------------------------------------------------
// ccq extraction

CcqState ccq_of(const DensityMatrix& state, std::size_t d) {
  require_key_dim(d, "ccq_of");
  const auto& layout = state.layout();
  if (layout.dim_of(kKeyA) != d || layout.dim_of(kKeyB) != d)
    throw std::invalid_argument("ccq_of: key subsystems of " + layout.describe() + " are not " + std::to_string(d) +
                                "-dimensional");

  // Eve holds the purification sum_k sqrt(l_k) |v_k>|k>; her state given
  // outcome (i, j) is (W_ij^dagger W_ij)^T with W_ij the (i, j) rows of
  // V sqrt(L). This avoids materializing the purified density matrix.
  Eigen::SelfAdjointEigenSolver<Matrix> solver(state.matrix());
  const auto& eig = solver.eigenvalues();
  std::vector<Eigen::Index> kept;
  for (Eigen::Index k = eig.size(); k-- > 0;)
    if (eig(k) > kRankCutoff) kept.push_back(k);
  const auto r = static_cast<Eigen::Index>(kept.size());
  const auto D = static_cast<Eigen::Index>(state.dim());
  Matrix w(D, r);
  for (Eigen::Index e = 0; e < r; ++e) w.col(e) = solver.eigenvectors().col(kept[e]) * std::sqrt(eig(kept[e]));

  const std::size_t pa = layout.index_of(kKeyA);
  const std::size_t pb = layout.index_of(kKeyB);
  const auto dims = layout.dims();
  std::vector<std::vector<Eigen::Index>> rows(d * d);
  for (Eigen::Index s = 0; s < D; ++s) {
    const auto dig = digits_of(static_cast<std::size_t>(s), dims);
    rows[dig[pa] * d + dig[pb]].push_back(s);
  }

  CcqState out;
  out.key_dim = d;
  out.probs = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  out.eve_states.resize(d * d);
  const SystemLayout eve_layout{{kEve, static_cast<std::size_t>(r)}};
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const Matrix wij = w(rows[i * d + j], Eigen::all);
      Matrix gram = wij.adjoint() * wij;
      const double p = gram.trace().real();
      out.probs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::max(p, 0.0);
      if (p > kRankCutoff) {
        Matrix cond = gram.transpose() / p;
        out.eve_states[i * d + j] = DensityMatrix::trusted(eve_layout, std::move(cond));
      }
    }
  return out;
}

bool is_ideal_ccq(const CcqState& ccq, double tol) {
  const std::size_t d = ccq.key_dim;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double ideal = i == j ? 1.0 / static_cast<double>(d) : 0.0;
      if (std::abs(ccq.probs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - ideal) > tol) return false;
    }
  std::vector<const DensityMatrix*> present;
  for (const auto& st : ccq.eve_states)
    if (st) present.push_back(&*st);
  for (std::size_t a = 0; a < present.size(); ++a)
    for (std::size_t b = a + 1; b < present.size(); ++b)
      if (trace_distance(*present[a], *present[b]) > tol) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Example states

double example_pbit_weight(std::size_t shield_dim) {
  return 0.5 * (1.0 + 1.0 / static_cast<double>(shield_dim));
}

DensityMatrix symmetric_state(std::size_t d) {
  const Matrix proj = (ops::identity(d * d) + ops::swap(d)) * 0.5;
  return DensityMatrix(SystemLayout{{kShieldA, d}, {kShieldB, d}}, proj / proj.trace().real());
}

DensityMatrix antisymmetric_state(std::size_t d) {
  if (d < 2) throw std::invalid_argument("antisymmetric_state: d must be at least 2");
  const Matrix proj = (ops::identity(d * d) - ops::swap(d)) * 0.5;
  return DensityMatrix(SystemLayout{{kShieldA, d}, {kShieldB, d}}, proj / proj.trace().real());
}

PditSpec example_pbit(std::size_t shield_dim) {
  if (shield_dim < 2) throw std::invalid_argument("example_pbit: shield dimension must be at least 2");
  const double p = example_pbit_weight(shield_dim);
  const SystemLayout shield_layout{{kShieldA, shield_dim}, {kShieldB, shield_dim}};
  PditSpec spec;
  spec.key_dim = 2;
  spec.shield_dim_a = shield_dim;
  spec.shield_dim_b = shield_dim;
  spec.twist_unitaries = {UnitaryOp::identity(shield_layout), UnitaryOp(shield_layout, ops::swap(shield_dim))};
  spec.shield = DensityMatrix(shield_layout, p * symmetric_state(shield_dim).matrix() +
                                                 (1.0 - p) * antisymmetric_state(shield_dim).matrix());
  return spec;
}

PditSpec random_pdit_spec(std::size_t key_dim, std::size_t shield_dim_a, std::size_t shield_dim_b, RngStream& rng) {
  require_key_dim(key_dim, "random_pdit_spec");
  PditSpec spec;
  spec.key_dim = key_dim;
  spec.shield_dim_a = shield_dim_a;
  spec.shield_dim_b = shield_dim_b;
  const auto layout = spec.shield_layout();
  for (std::size_t i = 0; i < key_dim; ++i)
    spec.twist_unitaries.emplace_back(layout, ops::random_unitary(layout.total_dim(), rng));
  spec.shield = random_density_matrix(layout, rng);
  spec.validate();
  return spec;
}

PditSpec untwisted_spec(std::size_t key_dim, DensityMatrix shield) {
  require_key_dim(key_dim, "untwisted_spec");
  const auto& sys = shield.layout().systems();
  if (sys.size() != 2) throw std::invalid_argument("untwisted_spec: shield must have two subsystems (A', B')");
  PditSpec spec;
  spec.key_dim = key_dim;
  spec.shield_dim_a = sys[0].dim;
  spec.shield_dim_b = sys[1].dim;
  spec.shield = shield.with_layout(spec.shield_layout());
  for (std::size_t i = 0; i < key_dim; ++i) spec.twist_unitaries.push_back(UnitaryOp::identity(spec.shield_layout()));
  return spec;
}

}  // namespace pditqkd

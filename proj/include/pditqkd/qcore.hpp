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

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "pditqkd/rng.hpp"

namespace pditqkd {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

using LabelList = std::vector<std::string>;

// Numerical tolerances shared by every module.
inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPsdTol = 1e-9;
inline constexpr double kUnitaryTol = 1e-10;
// Largest negative eigenvalue that from_noisy() will silently clip.
inline constexpr double kMaxClip = 1e-6;
// Eigenvalues at or below this are dropped by purification.
inline constexpr double kRankCutoff = 1e-12;

struct Subsystem {
  std::string label;
  std::size_t dim = 1;

  bool operator==(const Subsystem&) const = default;
};

/// Ordered list of labeled tensor factors. Basis index is row-major over the
/// factors: the first subsystem is the most significant digit.
class SystemLayout {
 public:
  SystemLayout() = default;
  SystemLayout(std::vector<Subsystem> systems);
  SystemLayout(std::initializer_list<Subsystem> systems);

  const std::vector<Subsystem>& systems() const { return systems_; }
  std::size_t size() const { return systems_.size(); }
  bool empty() const { return systems_.empty(); }
  std::size_t total_dim() const { return total_dim_; }

  std::optional<std::size_t> find(std::string_view label) const;
  bool contains(std::string_view label) const { return find(label).has_value(); }
  /// Position of `label`; throws std::invalid_argument if absent.
  std::size_t index_of(std::string_view label) const;
  std::size_t dim_of(std::string_view label) const;
  LabelList labels() const;
  std::vector<std::size_t> dims() const;

  SystemLayout concat(const SystemLayout& other) const;
  /// Sub-layout with the given labels, in the given order.
  SystemLayout select(std::span<const std::string> labels) const;
  /// Sub-layout with the given labels removed (layout order kept).
  SystemLayout without(std::span<const std::string> labels) const;
  SystemLayout relabeled(std::string_view from, std::string to) const;

  bool operator==(const SystemLayout& other) const { return systems_ == other.systems_; }

  std::string describe() const;

 private:
  std::vector<Subsystem> systems_;
  std::size_t total_dim_ = 1;
};

/// Hermitian, unit-trace, positive semidefinite operator over a layout.
///
/// Storage is shared and immutable, so copies are cheap and values can be
/// handed between threads freely.
class DensityMatrix {
 public:
  /// The trivial state on an empty layout (dimension 1).
  DensityMatrix();

  /// Validates every invariant (Hermitian 1e-10, trace 1e-10, PSD -1e-9).
  DensityMatrix(SystemLayout layout, Matrix entries);

  /// For outputs of trace-preserving completely positive maps applied to
  /// valid inputs. Checks Hermiticity and trace and symmetrizes away
  /// roundoff, but skips the O(D^3) spectral check.
  static DensityMatrix trusted(SystemLayout layout, Matrix entries);

  /// Clips negative eigenvalues to zero and renormalizes. Clipping more than
  /// kMaxClip is treated as a bug in the caller and throws.
  static DensityMatrix from_noisy(SystemLayout layout, const Matrix& entries);

  static DensityMatrix pure(SystemLayout layout, const Vector& amplitudes);
  static DensityMatrix basis_state(SystemLayout layout, std::span<const std::size_t> digits);
  static DensityMatrix maximally_mixed(SystemLayout layout);

  const SystemLayout& layout() const { return layout_; }
  const Matrix& matrix() const { return *entries_; }
  std::size_t dim() const { return layout_.total_dim(); }
  Complex operator()(std::size_t r, std::size_t c) const { return (*entries_)(r, c); }

  /// Identity of the shared storage; equal ids imply equal values.
  const void* storage_id() const { return entries_.get(); }

  DensityMatrix relabeled(std::string_view from, std::string to) const;
  DensityMatrix with_layout(SystemLayout layout) const;

 private:
  DensityMatrix(SystemLayout layout, std::shared_ptr<const Matrix> entries);

  SystemLayout layout_;
  std::shared_ptr<const Matrix> entries_;
};

class UnitaryOp {
 public:
  /// Validates U U^dagger = I within kUnitaryTol.
  UnitaryOp(SystemLayout layout, Matrix entries);

  static UnitaryOp identity(SystemLayout layout);

  const SystemLayout& layout() const { return layout_; }
  const Matrix& matrix() const { return entries_; }
  std::size_t dim() const { return layout_.total_dim(); }
  UnitaryOp adjoint() const;

 private:
  SystemLayout layout_;
  Matrix entries_;
};

/// Outcome of a sampled computational-basis measurement.
struct Measurement {
  std::vector<std::size_t> outcome;  // one digit per target, in target order
  DensityMatrix post_state;          // normalized state of the unmeasured subsystems
  double probability = 0.0;
};

// ---------------------------------------------------------------------------
// Index helpers

std::vector<std::size_t> digits_of(std::size_t index, std::span<const std::size_t> dims);
std::size_t index_of_digits(std::span<const std::size_t> digits, std::span<const std::size_t> dims);

/// Reorders the tensor factors of a square operator. `order[k]` is the old
/// position of the factor that ends up at position k.
Matrix permute_factors(const Matrix& op, std::span<const std::size_t> dims,
                       std::span<const std::size_t> order);

// ---------------------------------------------------------------------------
// Operations

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);

/// Reduced state on `keep`, kept subsystems in layout order.
DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::string> keep);

/// Reduced state on `labels`, in the order given.
DensityMatrix reduced_state(const DensityMatrix& rho, std::span<const std::string> labels);

/// (U (x) I) rho (U (x) I)^dagger with U acting on `targets` (in order).
DensityMatrix apply_unitary(const DensityMatrix& rho, const UnitaryOp& u,
                            std::span<const std::string> targets);
/// Same, with the targets taken from u's own layout labels.
DensityMatrix apply_unitary(const DensityMatrix& rho, const UnitaryOp& u);

/// Unnormalized sum_k K_k rho K_k^dagger on `targets`; the Kraus set may be
/// trace-decreasing (one branch of a measurement).
Matrix kraus_branch(const DensityMatrix& rho, std::span<const Matrix> kraus, std::span<const std::string> targets);

/// sum_k K_k rho K_k^dagger on `targets`. Completeness is the caller's
/// responsibility; the result is checked as a trusted density matrix.
DensityMatrix apply_kraus(const DensityMatrix& rho, std::span<const Matrix> kraus,
                          std::span<const std::string> targets);

/// Exact Born distribution of a computational-basis measurement on `targets`,
/// row-major over the target digits in the order given.
std::vector<double> computational_probabilities(const DensityMatrix& rho,
                                                std::span<const std::string> targets);

/// Unnormalized conditional block for a fixed outcome on `targets`; the
/// trace of the block is the outcome probability.
Matrix conditional_block(const DensityMatrix& rho, std::span<const std::string> targets,
                         std::span<const std::size_t> outcome);

Measurement measure_computational(const DensityMatrix& rho, std::span<const std::string> targets,
                                  RngStream& rng);

double expectation(const DensityMatrix& rho, const Matrix& observable,
                   std::span<const std::string> targets);

/// Pure state on layout + (eve_label, rank(rho)) whose marginal is rho.
DensityMatrix purify(const DensityMatrix& rho, std::string eve_label);

/// Partial transpose over the subsystems named in `labels`. Returns the raw
/// Hermitian matrix; it is generally not a density matrix.
Matrix partial_transpose(const DensityMatrix& rho, std::span<const std::string> labels);

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);
double binary_entropy(double x);

/// Sum of absolute eigenvalues of a Hermitian matrix.
double hermitian_trace_norm(const Matrix& m);
Eigen::VectorXd spectrum(const DensityMatrix& rho);

// ---------------------------------------------------------------------------
// Standard operators

namespace ops {

Matrix identity(std::size_t dim);
Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();
Matrix hadamard();
/// Cyclic shift |j> -> |j+1 mod d>.
Matrix shift(std::size_t d);
/// Clock phase |j> -> w^j |j>, w = exp(2 pi i / d).
Matrix clock(std::size_t d);
/// Discrete Fourier transform; equals the Hadamard gate for d = 2.
Matrix fourier(std::size_t d);
/// SWAP of two d-dimensional factors (dimension d^2).
Matrix swap(std::size_t d);
Matrix kron(const Matrix& a, const Matrix& b);
/// Haar-random unitary (QR of a complex Ginibre matrix with phase fix).
Matrix random_unitary(std::size_t dim, RngStream& rng);

}  // namespace ops

/// Random mixed state of the given rank (rank 0 means full rank).
DensityMatrix random_density_matrix(SystemLayout layout, RngStream& rng, std::size_t rank = 0);

}  // namespace pditqkd

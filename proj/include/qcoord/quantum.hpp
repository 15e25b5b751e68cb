// Copyright 2026 The qcoord Authors
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

/**
 * @file
 * Measurements (POVMs), states (density matrices), the QuantumSoftmax map
 * from unconstrained complex logits onto POVMs, and Born-rule joint
 * probabilities, each with a hand-written reverse-mode rule.
 *
 * Gradients use the cotangent convention documented in cmatrix.hpp:
 * cot(M) = dL/dRe(M) + i dL/dIm(M).
 */

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "qcoord/cmatrix.hpp"

namespace qcoord {

struct PovmDiagnostics {
  double max_hermiticity_error = 0.0;
  double min_eigenvalue = 0.0;
  double completeness_residual = 0.0;  // ||sum_j P_j - I||_F

  bool valid() const {
    return max_hermiticity_error <= 1e-10 && min_eigenvalue >= -1e-9 && completeness_residual <= 1e-8;
  }
};

/// Tuple of PSD matrices summing to the identity; one element per outcome.
class Povm {
 public:
  Povm() = default;
  /// Unchecked; call diagnose() or make_checked() when the source is untrusted.
  explicit Povm(std::vector<CMat> elements);
  static Povm make_checked(std::vector<CMat> elements);

  std::size_t dim() const { return elements_.empty() ? 0 : elements_.front().rows(); }
  std::size_t outcomes() const { return elements_.size(); }
  const CMat& operator[](std::size_t j) const { return elements_[j]; }
  const std::vector<CMat>& elements() const { return elements_; }

  PovmDiagnostics diagnose() const;

 private:
  std::vector<CMat> elements_;
};

/// Unconstrained complex logits Z_1..Z_m, the trainable POVM parameters.
struct PovmLogits {
  std::vector<CMat> logits;

  static PovmLogits zeros(std::size_t outcomes, std::size_t dim);
  std::size_t dim() const { return logits.empty() ? 0 : logits.front().rows(); }
  std::size_t outcomes() const { return logits.size(); }
  /// Real parameter count: 2 m d^2 (real and imaginary parts).
  std::size_t parameter_count() const { return 2 * outcomes() * dim() * dim(); }
  void write_parameters(std::span<double> out) const;
  void read_parameters(std::span<const double> in);
};

/// Hermitian PSD trace-one matrix.
class DensityMatrix {
 public:
  DensityMatrix() = default;
  static DensityMatrix make_checked(CMat matrix);
  /// Skips validation; for matrices that are valid by construction.
  static DensityMatrix unchecked(CMat matrix) { return DensityMatrix(std::move(matrix)); }
  static DensityMatrix bell();
  static DensityMatrix maximally_mixed(std::size_t dim);
  /// Basis state |k><k|.
  static DensityMatrix pure_basis(std::size_t dim, std::size_t k);

  std::size_t dim() const { return matrix_.rows(); }
  const CMat& matrix() const { return matrix_; }

 private:
  explicit DensityMatrix(CMat m) : matrix_(std::move(m)) {}
  CMat matrix_;
};

/// rho = B^H B / tr(B^H B) for unconstrained B.
struct DensityFactor {
  CMat factor;

  std::size_t dim() const { return factor.rows(); }
  std::size_t parameter_count() const { return 2 * dim() * dim(); }
  void write_parameters(std::span<double> out) const;
  void read_parameters(std::span<const double> in);
};

/// Forward pass of QuantumSoftmax with the intermediates the reverse pass needs.
struct SoftmaxForward {
  Povm povm;
  CMat s;                         // S = sum_j expm(herm(Z_j))
  std::vector<HermEig> logit_eigs;  // of herm(Z_j)
  std::vector<CMat> exps;         // R_j
  HermEig s_eig;
  CMat s_inv_sqrt;                // X = S^{-1/2}
};

SoftmaxForward quantum_softmax_forward(const PovmLogits& logits);

/// Algorithm: symmetrize, exponentiate, jointly normalize. Returns the POVM;
/// the normalizer S is available via quantum_softmax_forward.
Povm quantum_softmax(const PovmLogits& logits);

/// Gradient of a real loss with respect to (Re Z_j, Im Z_j), packed as complex
/// cotangents in a PovmLogits-shaped container. `s_cotangent` adds a direct
/// dependence of the loss on S (used by the conditioning penalty).
PovmLogits quantum_softmax_vjp(const SoftmaxForward& fwd, std::span<const CMat> cotangents,
                               const std::optional<CMat>& s_cotangent = std::nullopt);
PovmLogits quantum_softmax_vjp(const PovmLogits& logits, std::span<const CMat> cotangents,
                               const std::optional<CMat>& s_cotangent = std::nullopt);

/// Z_j = logm(P_j) for a strictly positive definite POVM; QuantumSoftmax maps
/// these logits back onto P exactly because S = I.
PovmLogits logits_from_povm(const Povm& povm);

DensityMatrix density_from_factor(const DensityFactor& f);
/// Cotangent of B given the cotangent of rho.
CMat density_from_factor_vjp(const DensityFactor& f, const CMat& rho_cotangent);

/// Joint outcome distribution, agent 0 most significant in the flattened index.
struct JointOutcomes {
  std::vector<std::size_t> outcomes;  // m_i per agent
  std::vector<double> probabilities;

  std::size_t flat_index(std::span<const std::size_t> outcome) const;
  std::vector<std::size_t> unflatten(std::size_t index) const;
};

JointOutcomes born_joint(const DensityMatrix& rho, std::span<const Povm* const> measurements);
JointOutcomes born_joint(const DensityMatrix& rho, std::span<const Povm> measurements);

/// Reverse pass of born_joint for loss L = sum_j cot[j] p(j).
struct BornCotangents {
  CMat rho;
  std::vector<std::vector<CMat>> elements;  // [agent][outcome]
};
BornCotangents born_joint_vjp(const DensityMatrix& rho, std::span<const Povm* const> measurements,
                              std::span<const double> probability_cotangents);

/// ||S - I||_F^2, the trace of (S - I)^H (S - I).
double conditioning_penalty(const CMat& s);
/// Cotangent of S for the penalty: 2 (S - I).
CMat conditioning_penalty_grad(const CMat& s);

}  // namespace qcoord

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

#include "qcoord/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qcoord/error.hpp"

namespace qcoord {

namespace {

double exp_fn(double x) { return std::exp(x); }
double inv_sqrt_fn(double x) { return 1.0 / std::sqrt(x); }
double inv_sqrt_deriv(double x) { return -0.5 / (x * std::sqrt(x)); }

void write_complex(const CMat& m, std::span<double> out, std::size_t& pos) {
  for (const cplx& v : m.data()) {
    out[pos++] = v.real();
    out[pos++] = v.imag();
  }
}

void read_complex(CMat& m, std::span<const double> in, std::size_t& pos) {
  for (cplx& v : m.data()) {
    v = cplx(in[pos], in[pos + 1]);
    pos += 2;
  }
}

std::vector<std::size_t> dims_of(std::span<const Povm* const> measurements) {
  std::vector<std::size_t> dims;
  dims.reserve(measurements.size());
  for (const Povm* m : measurements) dims.push_back(m->dim());
  return dims;
}

void check_joint_dims(const DensityMatrix& rho, std::span<const Povm* const> measurements) {
  std::size_t total = 1;
  for (const Povm* m : measurements) total *= m->dim();
  if (total != rho.dim() || measurements.empty()) {
    std::ostringstream msg;
    msg << "born_joint: product of measurement dimensions " << total << " does not match state dimension "
        << rho.dim();
    fail(ErrorCode::DimensionMismatch, msg.str());
  }
}

}  // namespace

Povm::Povm(std::vector<CMat> elements) : elements_(std::move(elements)) {
  require(!elements_.empty(), ErrorCode::InvalidArgument, "POVM needs at least one element");
  const std::size_t d = elements_.front().rows();
  for (const auto& e : elements_)
    require(e.square() && e.rows() == d, ErrorCode::DimensionMismatch, "POVM elements must share one square shape");
}

Povm Povm::make_checked(std::vector<CMat> elements) {
  Povm p(std::move(elements));
  const PovmDiagnostics diag = p.diagnose();
  if (!diag.valid()) {
    std::ostringstream msg;
    msg << "invalid POVM: hermiticity " << diag.max_hermiticity_error << ", min eigenvalue " << diag.min_eigenvalue
        << ", completeness residual " << diag.completeness_residual;
    fail(ErrorCode::InvalidArgument, msg.str());
  }
  return p;
}

PovmDiagnostics Povm::diagnose() const {
  PovmDiagnostics diag;
  diag.min_eigenvalue = std::numeric_limits<double>::infinity();
  CMat total = CMat::zeros(dim());
  for (const CMat& e : elements_) {
    const double herr = hermiticity_error(e);
    diag.max_hermiticity_error = std::max(diag.max_hermiticity_error, herr);
    total += e;
    const HermEig eig = eig_hermitian(hermitian_part(e));
    diag.min_eigenvalue = std::min(diag.min_eigenvalue, eig.values.front());
  }
  diag.completeness_residual = (total - CMat::identity(dim())).frobenius_norm();
  return diag;
}

PovmLogits PovmLogits::zeros(std::size_t outcomes, std::size_t dim) {
  PovmLogits z;
  z.logits.assign(outcomes, CMat::zeros(dim));
  return z;
}

void PovmLogits::write_parameters(std::span<double> out) const {
  require(out.size() == parameter_count(), ErrorCode::DimensionMismatch, "PovmLogits parameter size mismatch");
  std::size_t pos = 0;
  for (const auto& z : logits) write_complex(z, out, pos);
}

void PovmLogits::read_parameters(std::span<const double> in) {
  require(in.size() == parameter_count(), ErrorCode::DimensionMismatch, "PovmLogits parameter size mismatch");
  std::size_t pos = 0;
  for (auto& z : logits) read_complex(z, in, pos);
}

void DensityFactor::write_parameters(std::span<double> out) const {
  require(out.size() == parameter_count(), ErrorCode::DimensionMismatch, "DensityFactor parameter size mismatch");
  std::size_t pos = 0;
  write_complex(factor, out, pos);
}

void DensityFactor::read_parameters(std::span<const double> in) {
  require(in.size() == parameter_count(), ErrorCode::DimensionMismatch, "DensityFactor parameter size mismatch");
  std::size_t pos = 0;
  read_complex(factor, in, pos);
}

DensityMatrix DensityMatrix::make_checked(CMat matrix) {
  require(matrix.square(), ErrorCode::DimensionMismatch, "density matrix must be square");
  require(matrix.all_finite(), ErrorCode::InvalidArgument, "density matrix has non-finite entries");
  const double herr = hermiticity_error(matrix);
  require(herr <= 1e-10, ErrorCode::InvalidArgument, "density matrix is not Hermitian");
  const double tr = matrix.trace().real();
  require(std::abs(tr - 1.0) <= 1e-10, ErrorCode::InvalidArgument, "density matrix trace differs from 1");
  const HermEig eig = eig_hermitian(hermitian_part(matrix));
  require(eig.values.front() >= -1e-10, ErrorCode::InvalidArgument, "density matrix is not positive semidefinite");
  return DensityMatrix(std::move(matrix));
}

DensityMatrix DensityMatrix::bell() {
  CMat m(4);
  m(0, 0) = m(0, 3) = m(3, 0) = m(3, 3) = 0.5;
  return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::maximally_mixed(std::size_t dim) {
  return DensityMatrix(CMat::identity(dim) * cplx(1.0 / static_cast<double>(dim)));
}

DensityMatrix DensityMatrix::pure_basis(std::size_t dim, std::size_t k) {
  CMat m(dim);
  m(k, k) = 1.0;
  return DensityMatrix(std::move(m));
}

SoftmaxForward quantum_softmax_forward(const PovmLogits& logits) {
  const std::size_t m = logits.outcomes();
  require(m >= 1, ErrorCode::InvalidArgument, "quantum_softmax: no logits");
  const std::size_t d = logits.dim();
  SoftmaxForward fwd;
  fwd.logit_eigs.reserve(m);
  fwd.exps.reserve(m);
  fwd.s = CMat::zeros(d);
  for (const CMat& z : logits.logits) {
    require(z.square() && z.rows() == d, ErrorCode::DimensionMismatch, "quantum_softmax: logit shape mismatch");
    require(z.all_finite(), ErrorCode::InvalidArgument, "quantum_softmax: non-finite logits");
    HermEig eig = eig_hermitian(hermitian_part(z));
    if (eig.values.back() > kExpOverflow) {
      std::ostringstream msg;
      msg << "quantum_softmax: logit eigenvalue " << eig.values.back() << " saturates exp";
      fail(ErrorCode::Saturation, msg.str());
    }
    CMat r = eig.apply(exp_fn);
    fwd.s += r;
    fwd.exps.push_back(std::move(r));
    fwd.logit_eigs.push_back(std::move(eig));
  }
  fwd.s_eig = eig_hermitian(hermitian_part(fwd.s));
  if (fwd.s_eig.values.front() <= kPdFloor) {
    std::ostringstream msg;
    msg << "quantum_softmax: normalizer S ill-conditioned, minimum eigenvalue " << fwd.s_eig.values.front();
    throw IllConditionedError(fwd.s_eig.values.front(), msg.str());
  }
  fwd.s_inv_sqrt = fwd.s_eig.apply(inv_sqrt_fn);
  std::vector<CMat> elements;
  elements.reserve(m);
  for (const CMat& r : fwd.exps) elements.push_back(hermitian_part(fwd.s_inv_sqrt * r * fwd.s_inv_sqrt));
  fwd.povm = Povm(std::move(elements));
  return fwd;
}

Povm quantum_softmax(const PovmLogits& logits) { return quantum_softmax_forward(logits).povm; }

PovmLogits quantum_softmax_vjp(const SoftmaxForward& fwd, std::span<const CMat> cotangents,
                               const std::optional<CMat>& s_cotangent) {
  const std::size_t m = fwd.exps.size();
  require(cotangents.size() == m, ErrorCode::DimensionMismatch, "quantum_softmax_vjp: cotangent count mismatch");
  const std::size_t d = fwd.s.rows();
  const CMat& x = fwd.s_inv_sqrt;

  // P_j = X R_j X
  CMat cot_x = CMat::zeros(d);
  std::vector<CMat> cot_r(m);
  for (std::size_t j = 0; j < m; ++j) {
    const CMat& g = cotangents[j];
    require(g.square() && g.rows() == d, ErrorCode::DimensionMismatch, "quantum_softmax_vjp: cotangent shape mismatch");
    const CMat& r = fwd.exps[j];
    cot_r[j] = x * g * x;
    cot_x += g * x * r;
    cot_x += r * x * g;
  }
  // X = S^{-1/2}
  CMat cot_s = spectral_vjp(fwd.s_eig, inv_sqrt_fn, inv_sqrt_deriv, cot_x);
  if (s_cotangent) cot_s += *s_cotangent;

  PovmLogits grad;
  grad.logits.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    // S = sum_j R_j ; R_j = expm(Ztilde_j)
    cot_r[j] += cot_s;
    const CMat cot_zt = spectral_vjp(fwd.logit_eigs[j], exp_fn, exp_fn, cot_r[j]);
    // Ztilde = (Z + Z^H) / 2
    grad.logits.push_back((cot_zt + cot_zt.adjoint()) * cplx(0.5));
  }
  return grad;
}

PovmLogits quantum_softmax_vjp(const PovmLogits& logits, std::span<const CMat> cotangents,
                               const std::optional<CMat>& s_cotangent) {
  return quantum_softmax_vjp(quantum_softmax_forward(logits), cotangents, s_cotangent);
}

PovmLogits logits_from_povm(const Povm& povm) {
  PovmLogits z;
  z.logits.reserve(povm.outcomes());
  for (const CMat& p : povm.elements()) {
    const HermEig eig = eig_hermitian(hermitian_part(p));
    require(eig.values.front() > 0.0, ErrorCode::InvalidArgument,
            "logits_from_povm: POVM element is not strictly positive definite");
    z.logits.push_back(eig.apply([](double v) { return std::log(v); }));
  }
  return z;
}

DensityMatrix density_from_factor(const DensityFactor& f) {
  require(f.factor.square(), ErrorCode::DimensionMismatch, "density factor must be square");
  const double norm = f.factor.frobenius_norm();
  require(norm >= 1e-30, ErrorCode::InvalidArgument, "density factor is numerically zero");
  const CMat gram = f.factor.adjoint() * f.factor;
  return DensityMatrix::unchecked(hermitian_part(gram * cplx(1.0 / (norm * norm))));
}

CMat density_from_factor_vjp(const DensityFactor& f, const CMat& rho_cotangent) {
  const CMat& b = f.factor;
  const double c = b.frobenius_norm() * b.frobenius_norm();
  require(c >= 1e-60, ErrorCode::InvalidArgument, "density factor is numerically zero");
  const CMat rho = b.adjoint() * b * cplx(1.0 / c);
  double proj = 0.0;  // Re tr(G^H rho)
  for (std::size_t i = 0; i < rho.data().size(); ++i)
    proj += (std::conj(rho_cotangent.data()[i]) * rho.data()[i]).real();
  CMat out = b * (rho_cotangent + rho_cotangent.adjoint());
  out -= b * cplx(2.0 * proj);
  return out * cplx(1.0 / c);
}

std::size_t JointOutcomes::flat_index(std::span<const std::size_t> outcome) const {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) idx = idx * outcomes[i] + outcome[i];
  return idx;
}

std::vector<std::size_t> JointOutcomes::unflatten(std::size_t index) const {
  std::vector<std::size_t> out(outcomes.size());
  for (std::size_t i = outcomes.size(); i-- > 0;) {
    out[i] = index % outcomes[i];
    index /= outcomes[i];
  }
  return out;
}

JointOutcomes born_joint(const DensityMatrix& rho, std::span<const Povm* const> measurements) {
  check_joint_dims(rho, measurements);
  JointOutcomes out;
  std::size_t total = 1;
  for (const Povm* m : measurements) {
    out.outcomes.push_back(m->outcomes());
    total *= m->outcomes();
  }
  out.probabilities.resize(total);
  for (std::size_t flat = 0; flat < total; ++flat) {
    const auto idx = out.unflatten(flat);
    CMat k = (*measurements[0])[idx[0]];
    for (std::size_t i = 1; i < measurements.size(); ++i) k = kron(k, (*measurements[i])[idx[i]]);
    out.probabilities[flat] = trace_inner(rho.matrix(), k);
  }
  double sum = 0.0;
  for (double& p : out.probabilities) {
    if (p < -1e-10) {
      std::ostringstream msg;
      msg << "born_joint: negative probability " << p << " (broken POVM or state invariant)";
      fail(ErrorCode::Integrity, msg.str());
    }
    p = std::max(p, 0.0);
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-8) {
    std::ostringstream msg;
    msg << "born_joint: probabilities sum to " << sum;
    fail(ErrorCode::Integrity, msg.str());
  }
  for (double& p : out.probabilities) p /= sum;
  return out;
}

JointOutcomes born_joint(const DensityMatrix& rho, std::span<const Povm> measurements) {
  std::vector<const Povm*> ptrs;
  for (const auto& m : measurements) ptrs.push_back(&m);
  return born_joint(rho, ptrs);
}

BornCotangents born_joint_vjp(const DensityMatrix& rho, std::span<const Povm* const> measurements,
                              std::span<const double> probability_cotangents) {
  check_joint_dims(rho, measurements);
  const std::size_t n = measurements.size();
  const auto dims = dims_of(measurements);
  JointOutcomes shape;
  std::size_t total = 1;
  for (const Povm* m : measurements) {
    shape.outcomes.push_back(m->outcomes());
    total *= m->outcomes();
  }
  require(probability_cotangents.size() == total, ErrorCode::DimensionMismatch,
          "born_joint_vjp: cotangent count mismatch");

  const std::size_t dtot = rho.dim();
  // Per-agent digit of every joint basis index, agent 0 most significant.
  std::vector<std::vector<std::size_t>> digits(dtot, std::vector<std::size_t>(n));
  for (std::size_t r = 0; r < dtot; ++r) {
    std::size_t rem = r;
    for (std::size_t i = n; i-- > 0;) {
      digits[r][i] = rem % dims[i];
      rem /= dims[i];
    }
  }

  BornCotangents out;
  out.rho = CMat::zeros(dtot);
  out.elements.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.elements[i].assign(measurements[i]->outcomes(), CMat::zeros(dims[i]));

  std::vector<cplx> factors(n);
  for (std::size_t flat = 0; flat < total; ++flat) {
    const double g = probability_cotangents[flat];
    if (g == 0.0) continue;
    const auto idx = shape.unflatten(flat);
    for (std::size_t r = 0; r < dtot; ++r) {
      for (std::size_t c = 0; c < dtot; ++c) {
        // p = Re sum_{r,c} rho[r,c] prod_k M_k[c_k, r_k]
        cplx prod = 1.0;
        for (std::size_t k = 0; k < n; ++k) {
          factors[k] = (*measurements[k])[idx[k]](digits[c][k], digits[r][k]);
          prod *= factors[k];
        }
        // cot(rho) = sum g K^H, K[c, r] = prod -> K^H[r, c] = conj(prod)
        out.rho(r, c) += g * std::conj(prod);
        const cplx w = g * rho.matrix()(r, c);
        if (w == cplx(0.0)) continue;
        for (std::size_t i = 0; i < n; ++i) {
          cplx others = 1.0;
          for (std::size_t k = 0; k < n; ++k)
            if (k != i) others *= factors[k];
          // p contains C[r_i, c_i] M_i[c_i, r_i]; cot(M_i) = C^H -> entry (c_i, r_i) = conj(C[r_i, c_i])
          out.elements[i][idx[i]](digits[c][i], digits[r][i]) += std::conj(w * others);
        }
      }
    }
  }
  return out;
}

double conditioning_penalty(const CMat& s) {
  require(s.square(), ErrorCode::DimensionMismatch, "conditioning_penalty: matrix is not square");
  const double n = (s - CMat::identity(s.rows())).frobenius_norm();
  return n * n;
}

CMat conditioning_penalty_grad(const CMat& s) { return (s - CMat::identity(s.rows())) * cplx(2.0); }

}  // namespace qcoord

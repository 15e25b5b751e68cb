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
 * Small dense complex-matrix kernel. Every matrix in this library is at most
 * 16x16, so storage is a flat row-major vector and the only decomposition is
 * a cyclic Jacobi eigensolver for Hermitian input.
 */

#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

namespace qcoord {

using cplx = std::complex<double>;

class CMat {
 public:
  CMat() = default;
  CMat(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  explicit CMat(std::size_t dim) : CMat(dim, dim) {}
  /// Row-major nested initializer: CMat{{1, 0}, {0, 1}}.
  CMat(std::initializer_list<std::initializer_list<cplx>> rows);

  static CMat identity(std::size_t dim);
  static CMat zeros(std::size_t dim) { return CMat(dim); }
  static CMat diagonal(std::span<const double> values);
  static CMat diagonal(std::initializer_list<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  /// Side length; only meaningful for square matrices.
  std::size_t dim() const { return rows_; }
  bool square() const { return rows_ == cols_; }

  cplx& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const cplx& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<cplx> data() { return data_; }
  std::span<const cplx> data() const { return data_; }

  CMat adjoint() const;
  cplx trace() const;
  double frobenius_norm() const;
  bool all_finite() const;

  CMat& operator+=(const CMat& o);
  CMat& operator-=(const CMat& o);
  CMat& operator*=(cplx s);

  friend CMat operator+(CMat a, const CMat& b) { return a += b; }
  friend CMat operator-(CMat a, const CMat& b) { return a -= b; }
  friend CMat operator*(CMat a, cplx s) { return a *= s; }
  friend CMat operator*(cplx s, CMat a) { return a *= s; }
  friend CMat operator*(const CMat& a, const CMat& b);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

/// Eigendecomposition A = U diag(values) U^H of a Hermitian matrix.
struct HermEig {
  std::vector<double> values;  // ascending
  CMat vectors;                // columns are eigenvectors

  /// U diag(f(values)) U^H.
  CMat apply(const std::function<double(double)>& f) const;
};

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kPdFloor = 1e-12;
inline constexpr double kExpOverflow = 700.0;
inline constexpr double kDegenerateGap = 1e-10;

CMat hermitian_part(const CMat& z);
HermEig eig_hermitian(const CMat& a);
CMat expm_hermitian(const CMat& a);
CMat inv_sqrt_psd(const CMat& a);
CMat kron(const CMat& a, const CMat& b);
/// Re tr(A B); throws Integrity if the imaginary part exceeds tolerance.
double trace_inner(const CMat& a, const CMat& b);

/// Relative Frobenius distance from Hermitian.
double hermiticity_error(const CMat& a);

/// Adjoint (reverse-mode) of X = f(A) at Hermitian A with eigendecomposition
/// `eig`: given the cotangent of X, returns the cotangent of A.
/// Cotangent convention throughout the library: for real loss L of complex
/// matrix M, cot(M) = dL/dRe(M) + i dL/dIm(M), so dL = Re tr(cot^H dM).
/// The divided difference (f(li)-f(lj))/(li-lj) falls back to f'(l) when
/// |li - lj| < kDegenerateGap.
CMat spectral_vjp(const HermEig& eig, const std::function<double(double)>& f,
                  const std::function<double(double)>& fprime, const CMat& cotangent);

}  // namespace qcoord

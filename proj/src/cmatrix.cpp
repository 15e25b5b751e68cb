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

#include "qcoord/cmatrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "qcoord/error.hpp"

namespace qcoord {

CMat::CMat(std::initializer_list<std::initializer_list<cplx>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    require(r.size() == cols_, ErrorCode::DimensionMismatch, "ragged matrix initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

CMat CMat::identity(std::size_t dim) {
  CMat m(dim);
  for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

CMat CMat::diagonal(std::span<const double> values) {
  CMat m(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

CMat CMat::diagonal(std::initializer_list<double> values) {
  return diagonal(std::span<const double>(values.begin(), values.size()));
}

CMat CMat::adjoint() const {
  CMat out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) out(c, r) = std::conj((*this)(r, c));
  return out;
}

cplx CMat::trace() const {
  cplx t = 0.0;
  for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
  return t;
}

double CMat::frobenius_norm() const {
  double s = 0.0;
  for (const auto& v : data_) s += std::norm(v);
  return std::sqrt(s);
}

bool CMat::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](const cplx& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
}

CMat& CMat::operator+=(const CMat& o) {
  require(rows_ == o.rows_ && cols_ == o.cols_, ErrorCode::DimensionMismatch, "matrix sum shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

CMat& CMat::operator-=(const CMat& o) {
  require(rows_ == o.rows_ && cols_ == o.cols_, ErrorCode::DimensionMismatch, "matrix difference shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

CMat& CMat::operator*=(cplx s) {
  for (auto& v : data_) v *= s;
  return *this;
}

CMat operator*(const CMat& a, const CMat& b) {
  require(a.cols_ == b.rows_, ErrorCode::DimensionMismatch, "matrix product shape mismatch");
  CMat out(a.rows_, b.cols_);
  for (std::size_t i = 0; i < a.rows_; ++i)
    for (std::size_t k = 0; k < a.cols_; ++k) {
      const cplx aik = a(i, k);
      if (aik == cplx(0.0)) continue;
      for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

CMat HermEig::apply(const std::function<double(double)>& f) const {
  const std::size_t d = values.size();
  CMat out(d);
  std::vector<double> fv(d);
  for (std::size_t k = 0; k < d; ++k) fv[k] = f(values[k]);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      cplx s = 0.0;
      for (std::size_t k = 0; k < d; ++k) s += vectors(i, k) * fv[k] * std::conj(vectors(j, k));
      out(i, j) = s;
    }
  return out;
}

double hermiticity_error(const CMat& a) {
  require(a.square(), ErrorCode::DimensionMismatch, "hermiticity check needs a square matrix");
  double diff = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) diff += std::norm(a(i, j) - std::conj(a(j, i)));
  return std::sqrt(diff) / std::max(1.0, a.frobenius_norm());
}

CMat hermitian_part(const CMat& z) {
  require(z.square(), ErrorCode::DimensionMismatch, "hermitian_part: matrix is not square");
  const std::size_t d = z.rows();
  CMat out(d);
  for (std::size_t i = 0; i < d; ++i) {
    out(i, i) = z(i, i).real();
    for (std::size_t j = i + 1; j < d; ++j) {
      const cplx v = 0.5 * (z(i, j) + std::conj(z(j, i)));
      out(i, j) = v;
      out(j, i) = std::conj(v);
    }
  }
  return out;
}

HermEig eig_hermitian(const CMat& input) {
  require(input.square(), ErrorCode::DimensionMismatch, "eig_hermitian: matrix is not square");
  require(input.all_finite(), ErrorCode::InvalidArgument, "eig_hermitian: non-finite entries");
  if (hermiticity_error(input) > kHermitianTol) {
    std::ostringstream msg;
    msg << "eig_hermitian: input not Hermitian (relative error " << hermiticity_error(input) << ")";
    fail(ErrorCode::InvalidArgument, msg.str());
  }
  const std::size_t d = input.rows();
  CMat a = hermitian_part(input);
  CMat v = CMat::identity(d);

  const double scale = std::max(a.frobenius_norm(), 1e-300);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < d; ++p)
      for (std::size_t q = p + 1; q < d; ++q) off += std::norm(a(p, q));
    if (std::sqrt(off) <= 1e-17 * scale) break;

    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        const double r = std::abs(a(p, q));
        if (r <= 1e-300) continue;
        // Phase e^{i phi} turns the (p,q) block real symmetric, then a real
        // Jacobi rotation annihilates it. G = D P with D = diag(1, e^{i phi}).
        const cplx phase = std::conj(a(p, q)) / r;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double tau = (aqq - app) / (2.0 * r);
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const cplx gpp = c, gpq = s, gqp = -s * phase, gqq = c * phase;

        // A <- A G (columns p, q)
        for (std::size_t k = 0; k < d; ++k) {
          const cplx akp = a(k, p), akq = a(k, q);
          a(k, p) = akp * gpp + akq * gqp;
          a(k, q) = akp * gpq + akq * gqq;
        }
        // A <- G^H A (rows p, q)
        for (std::size_t k = 0; k < d; ++k) {
          const cplx apk = a(p, k), aqk = a(q, k);
          a(p, k) = std::conj(gpp) * apk + std::conj(gqp) * aqk;
          a(q, k) = std::conj(gpq) * apk + std::conj(gqq) * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        for (std::size_t k = 0; k < d; ++k) {
          const cplx vkp = v(k, p), vkq = v(k, q);
          v(k, p) = vkp * gpp + vkq * gqp;
          v(k, q) = vkp * gpq + vkq * gqq;
        }
      }
    }
  }

  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });
  HermEig out;
  out.values.resize(d);
  out.vectors = CMat(d);
  for (std::size_t k = 0; k < d; ++k) {
    out.values[k] = a(order[k], order[k]).real();
    for (std::size_t i = 0; i < d; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

CMat expm_hermitian(const CMat& a) {
  const HermEig eig = eig_hermitian(a);
  if (!eig.values.empty() && eig.values.back() > kExpOverflow) {
    std::ostringstream msg;
    msg << "expm_hermitian: eigenvalue " << eig.values.back() << " saturates exp";
    fail(ErrorCode::Saturation, msg.str());
  }
  return eig.apply([](double x) { return std::exp(x); });
}

CMat inv_sqrt_psd(const CMat& a) {
  const HermEig eig = eig_hermitian(a);
  if (!eig.values.empty() && eig.values.front() <= kPdFloor) {
    std::ostringstream msg;
    msg << "inv_sqrt_psd: ill-conditioned matrix, minimum eigenvalue " << eig.values.front();
    throw IllConditionedError(eig.values.front(), msg.str());
  }
  return eig.apply([](double x) { return 1.0 / std::sqrt(x); });
}

CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const cplx aij = a(i, j);
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l) out(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
    }
  return out;
}

double trace_inner(const CMat& a, const CMat& b) {
  require(a.square() && b.square() && a.rows() == b.rows(), ErrorCode::DimensionMismatch,
          "trace_inner: dimension mismatch");
  cplx t = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) t += a(i, k) * b(k, i);
  const double scale = std::max(1.0, a.frobenius_norm() * b.frobenius_norm());
  if (std::abs(t.imag()) > 1e-12 * scale) {
    std::ostringstream msg;
    msg << "trace_inner: imaginary part " << t.imag() << " exceeds tolerance";
    fail(ErrorCode::Integrity, msg.str());
  }
  return t.real();
}

CMat spectral_vjp(const HermEig& eig, const std::function<double(double)>& f,
                  const std::function<double(double)>& fprime, const CMat& cotangent) {
  const std::size_t d = eig.values.size();
  const CMat& u = eig.vectors;
  std::vector<double> fv(d);
  for (std::size_t k = 0; k < d; ++k) fv[k] = f(eig.values[k]);

  CMat inner = u.adjoint() * cotangent * u;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double li = eig.values[i], lj = eig.values[j];
      const double dd =
          std::abs(li - lj) < kDegenerateGap ? fprime(0.5 * (li + lj)) : (fv[i] - fv[j]) / (li - lj);
      inner(i, j) *= dd;
    }
  return u * inner * u.adjoint();
}

}  // namespace qcoord

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

#include <cmath>

#include "doctest.h"
#include "qcoord/cmatrix.hpp"
#include "qcoord/error.hpp"
#include "test_util.hpp"

using namespace qcoord;
using namespace qcoord::testing;

TEST_CASE("hermitian_part") {
  CHECK(max_abs_diff(hermitian_part(CMat::identity(2)), CMat::identity(2)) == 0.0);
  const CMat z{{0, 2}, {0, 0}};
  const CMat expected{{0, 1}, {1, 0}};
  CHECK(max_abs_diff(hermitian_part(z), expected) == 0.0);

  Rng rng(1);
  const CMat h = hermitian_part(random_cmat(rng, 3));
  CHECK(max_abs_diff(h, h.adjoint()) <= 1e-15);

  CHECK_THROWS_AS(hermitian_part(CMat(2, 3)), Error);
}

TEST_CASE("eig_hermitian spectra and reconstruction") {
  {
    const HermEig e = eig_hermitian(CMat::diagonal({3.0, 1.0}));
    CHECK(e.values[0] == doctest::Approx(1.0));
    CHECK(e.values[1] == doctest::Approx(3.0));
  }
  {
    const HermEig e = eig_hermitian(CMat{{0, 1}, {1, 0}});
    CHECK(e.values[0] == doctest::Approx(-1.0));
    CHECK(e.values[1] == doctest::Approx(1.0));
  }
  Rng rng(7);
  for (std::size_t d : {1, 2, 3, 4, 8, 16}) {
    for (int trial = 0; trial < 20; ++trial) {
      const CMat a = random_hermitian(rng, d);
      const HermEig e = eig_hermitian(a);
      const CMat rebuilt = e.apply([](double x) { return x; });
      CHECK((rebuilt - a).frobenius_norm() <= 1e-10 * a.frobenius_norm());
      CHECK((e.vectors.adjoint() * e.vectors - CMat::identity(d)).frobenius_norm() <= 1e-10);
      for (std::size_t k = 1; k < d; ++k) CHECK(e.values[k - 1] <= e.values[k]);
    }
  }
}

TEST_CASE("eig_hermitian rejects non-Hermitian input") {
  CHECK_THROWS_AS(eig_hermitian(CMat{{0, 1}, {0, 0}}), Error);
  CHECK_THROWS_AS(eig_hermitian(CMat(2, 3)), Error);
}

TEST_CASE("eig_hermitian handles degenerate spectra") {
  const HermEig e = eig_hermitian(CMat::identity(4) * cplx(2.5));
  for (double v : e.values) CHECK(v == doctest::Approx(2.5));
  // Rank-one projector: eigenvalues {0, 0, 1}.
  const CMat p{{1.0 / 3, 1.0 / 3, 1.0 / 3}, {1.0 / 3, 1.0 / 3, 1.0 / 3}, {1.0 / 3, 1.0 / 3, 1.0 / 3}};
  const HermEig ep = eig_hermitian(p);
  CHECK(std::abs(ep.values[0]) < 1e-14);
  CHECK(std::abs(ep.values[1]) < 1e-14);
  CHECK(ep.values[2] == doctest::Approx(1.0));
}

TEST_CASE("expm_hermitian") {
  CHECK(max_abs_diff(expm_hermitian(CMat::zeros(3)), CMat::identity(3)) <= 1e-15);
  const CMat e = expm_hermitian(CMat::diagonal({std::log(2.0), std::log(3.0)}));
  CHECK(max_abs_diff(e, CMat::diagonal({2.0, 3.0})) <= 1e-14);

  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const CMat a = random_hermitian(rng, 1 + trial % 5);
    const CMat prod = expm_hermitian(a) * expm_hermitian(a * cplx(-1.0));
    CHECK(max_abs_diff(prod, CMat::identity(a.rows())) <= 1e-9);
    const HermEig pos = eig_hermitian(hermitian_part(expm_hermitian(a)));
    CHECK(pos.values.front() > 0.0);
  }
  CHECK_THROWS_AS(expm_hermitian(CMat::diagonal({701.0, 0.0})), Error);
  try {
    expm_hermitian(CMat::diagonal({701.0}));
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::Saturation);
  }
}

TEST_CASE("inv_sqrt_psd") {
  CHECK(max_abs_diff(inv_sqrt_psd(CMat::identity(2) * cplx(4.0)), CMat::identity(2) * cplx(0.5)) <= 1e-15);
  CHECK(max_abs_diff(inv_sqrt_psd(CMat::diagonal({1.0, 4.0})), CMat::diagonal({1.0, 0.5})) <= 1e-15);

  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t d = 1 + trial % 6;
    const CMat b = random_cmat(rng, d);
    const CMat a = hermitian_part(b.adjoint() * b + CMat::identity(d));
    const CMat x = inv_sqrt_psd(a);
    CHECK(max_abs_diff(x * a * x, CMat::identity(d)) <= 1e-9);
  }

  try {
    inv_sqrt_psd(CMat::diagonal({1.0, 1e-13}));
    FAIL("expected ill-conditioned error");
  } catch (const IllConditionedError& err) {
    CHECK(err.code() == ErrorCode::IllConditioned);
    CHECK(err.min_eigenvalue() == doctest::Approx(1e-13));
  }
}

TEST_CASE("kron") {
  CHECK(max_abs_diff(kron(CMat::identity(2), CMat::identity(2)), CMat::identity(4)) == 0.0);
  CHECK(max_abs_diff(kron(CMat::diagonal({1.0, 0.0}), CMat::diagonal({1.0, 0.0})),
                     CMat::diagonal({1.0, 0.0, 0.0, 0.0})) == 0.0);
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const CMat a = random_cmat(rng, 1 + trial % 3);
    const CMat b = random_cmat(rng, 1 + trial % 4);
    const CMat c = random_cmat(rng, 2);
    CHECK(std::abs(kron(a, b).trace() - a.trace() * b.trace()) <= 1e-12 * std::max(1.0, std::abs(a.trace() * b.trace())));
    CHECK(max_abs_diff(kron(kron(a, b), c), kron(a, kron(b, c))) <= 1e-12);
  }
}

TEST_CASE("trace_inner") {
  Rng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const CMat b = random_cmat(rng, 3);
    const CMat rho = hermitian_part(b.adjoint() * b * cplx(1.0 / (b.frobenius_norm() * b.frobenius_norm())));
    CHECK(trace_inner(rho, CMat::identity(3)) == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(trace_inner(CMat::identity(2) * cplx(0.5), CMat::diagonal({1.0, 0.0})) == doctest::Approx(0.5));
  CMat bell(4);
  bell(0, 0) = bell(0, 3) = bell(3, 0) = bell(3, 3) = 0.5;
  CHECK(trace_inner(bell, CMat::diagonal({1.0, 0.0, 0.0, 0.0})) == doctest::Approx(0.5));
  CHECK_THROWS_AS(trace_inner(CMat::identity(2), CMat::identity(3)), Error);
  // Non-Hermitian pair with an imaginary trace is an integrity failure.
  CHECK_THROWS_AS(trace_inner(CMat{{cplx(0, 1)}}, CMat{{1.0}}), Error);
}

TEST_CASE("spectral_vjp matches finite differences of tr(G^H f(A))") {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = 1 + trial % 4;
    const CMat b = random_cmat(rng, d);
    const CMat a = hermitian_part(b.adjoint() * b + CMat::identity(d));
    const CMat g = random_cmat(rng, d);
    auto loss = [&](const CMat& m) {
      const CMat x = inv_sqrt_psd(hermitian_part(m));
      double s = 0.0;
      for (std::size_t i = 0; i < x.data().size(); ++i) s += (std::conj(g.data()[i]) * x.data()[i]).real();
      return s;
    };
    const CMat cot = spectral_vjp(eig_hermitian(a), [](double x) { return 1 / std::sqrt(x); },
                                  [](double x) { return -0.5 / (x * std::sqrt(x)); }, g);
    // Directional derivative along a random Hermitian direction.
    const CMat e = random_hermitian(rng, d);
    const double h = 1e-6;
    const double fd = (loss(a + e * cplx(h)) - loss(a - e * cplx(h))) / (2 * h);
    double analytic = 0.0;
    for (std::size_t i = 0; i < e.data().size(); ++i) analytic += (std::conj(cot.data()[i]) * e.data()[i]).real();
    CHECK(std::abs(analytic - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
  }
}

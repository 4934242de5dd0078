// Copyright 2026 The qreset Authors
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

// Test-only oracle helpers, independent of the library's operator assembly
// paths: dense Kronecker products, dense propagators and simple series sums.

#ifndef QRESET_TEST_SUPPORT_HPP
#define QRESET_TEST_SUPPORT_HPP

#include <random>

#include "qreset/core.hpp"

namespace testsupport {

using qreset::cxd;
using qreset::MatCxd;
using qreset::VecCxd;

inline MatCxd kron(const MatCxd& a, const MatCxd& b) {
  MatCxd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline MatCxd kron_chain(const std::vector<MatCxd>& factors) {
  MatCxd out = MatCxd::Identity(1, 1);
  for (const auto& f : factors) out = kron(out, f);
  return out;
}

inline MatCxd random_complex_matrix(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  MatCxd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = cxd(u(rng), u(rng));
  return m;
}

inline MatCxd random_hermitian(int n, std::mt19937_64& rng) {
  const MatCxd m = random_complex_matrix(n, rng);
  return 0.5 * (m + m.adjoint());
}

inline MatCxd random_density(int n, std::mt19937_64& rng) {
  const MatCxd m = random_complex_matrix(n, rng);
  MatCxd rho = m * m.adjoint();
  rho /= rho.trace().real();
  return rho;
}

/// vec(rho) with column-major stacking, so that
/// vec(A rho B) = kron(B^T, A) vec(rho).
inline VecCxd vectorize(const MatCxd& m) {
  VecCxd v(m.size());
  int k = 0;
  for (int j = 0; j < m.cols(); ++j)
    for (int i = 0; i < m.rows(); ++i) v(k++) = m(i, j);
  return v;
}

inline MatCxd unvectorize(const VecCxd& v, int n) {
  MatCxd m(n, n);
  int k = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) m(i, j) = v(k++);
  return m;
}

/// Dense Lindblad superoperator in the same rate convention as the library:
/// L = -i(I kron H - H^T kron I)
///     + sum gamma [conj(c) kron c - 1/2 (I kron c^+c + (c^+c)^T kron I)].
inline MatCxd dense_liouvillian(const MatCxd& h, const std::vector<MatCxd>& ops,
                                const std::vector<double>& rates) {
  const int n = static_cast<int>(h.rows());
  const MatCxd id = MatCxd::Identity(n, n);
  MatCxd superop = -qreset::iu * (kron(id, h) - kron(h.transpose(), id));
  for (size_t k = 0; k < ops.size(); ++k) {
    const MatCxd& c = ops[k];
    const MatCxd cdc = c.adjoint() * c;
    superop += rates[k] * (kron(c.conjugate(), c) -
                           0.5 * (kron(id, cdc) + kron(cdc.transpose(), id)));
  }
  return superop;
}

}  // namespace testsupport

#endif  // QRESET_TEST_SUPPORT_HPP

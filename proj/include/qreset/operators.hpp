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

#ifndef QRESET_OPERATORS_HPP
#define QRESET_OPERATORS_HPP

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "qreset/hilbert.hpp"

namespace qreset {

namespace detail {

inline HilbertSpec single_mode_spec(int d, const std::string& label) {
  return HilbertSpec({d}, {label});
}

}  // namespace detail

/// Truncated annihilation operator: <k|a|k+1> = sqrt(k+1), zero elsewhere.
inline LinearOperator destroy(int cutoff_dim) {
  if (cutoff_dim < 2) throw DimensionError("destroy: cutoff dimension must be >= 2");
  std::vector<Eigen::Triplet<cxd>> t;
  t.reserve(cutoff_dim - 1);
  for (int k = 0; k + 1 < cutoff_dim; ++k)
    t.emplace_back(k, k + 1, cxd(std::sqrt(double(k + 1)), 0.0));
  SparseCxd m(cutoff_dim, cutoff_dim);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return LinearOperator(detail::single_mode_spec(cutoff_dim, "r1"), std::move(m));
}

enum class PauliAxis { X, Y, Z, Plus, Minus };

/// Pauli operators in the basis ordering (|0> ground, |1> excited) with
/// sigma_z|0> = -|0>. This fixes sigma_x sigma_y = i sigma_z and makes
/// sigma_+ the raising operator, consistent with H carrying +omega sigma_z/2.
inline LinearOperator pauli(PauliAxis axis) {
  std::vector<Eigen::Triplet<cxd>> t;
  switch (axis) {
    case PauliAxis::X:
      t.emplace_back(0, 1, cxd(1, 0));
      t.emplace_back(1, 0, cxd(1, 0));
      break;
    case PauliAxis::Y:
      t.emplace_back(0, 1, cxd(0, 1));
      t.emplace_back(1, 0, cxd(0, -1));
      break;
    case PauliAxis::Z:
      t.emplace_back(0, 0, cxd(-1, 0));
      t.emplace_back(1, 1, cxd(1, 0));
      break;
    case PauliAxis::Plus:
      t.emplace_back(1, 0, cxd(1, 0));
      break;
    case PauliAxis::Minus:
      t.emplace_back(0, 1, cxd(1, 0));
      break;
    default:
      throw DimensionError("pauli: unknown axis");
  }
  SparseCxd m(2, 2);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return LinearOperator(detail::single_mode_spec(2, "q1"), std::move(m));
}

/// Tensor product of `op` acting on subsystem `slot` with identity elsewhere.
inline LinearOperator embed(const LinearOperator& op, int slot, const HilbertSpec& spec) {
  if (slot < 0 || slot >= spec.n_subsystems())
    throw DimensionError("embed: slot out of range");
  const int ld = spec.subsystem_dim(slot);
  if (op.dim() != ld)
    throw DimensionError("embed: operator dimension does not match subsystem");
  const int pre = spec.prefix_dim(slot);
  const int suf = spec.suffix_dim(slot);

  std::vector<Eigen::Triplet<cxd>> t;
  t.reserve(static_cast<size_t>(op.mat.nonZeros()) * pre * suf);
  for (int p = 0; p < pre; ++p) {
    const int base = p * ld * suf;
    for (int k = 0; k < op.mat.outerSize(); ++k) {
      for (SparseCxd::InnerIterator it(op.mat, k); it; ++it) {
        const int r0 = base + static_cast<int>(it.row()) * suf;
        const int c0 = base + static_cast<int>(it.col()) * suf;
        for (int s = 0; s < suf; ++s) t.emplace_back(r0 + s, c0 + s, it.value());
      }
    }
  }
  SparseCxd m(spec.dim(), spec.dim());
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return LinearOperator(spec, std::move(m));
}

/// <psi|A|psi> for pure states, tr(A rho) for density matrices.
inline cxd expect(const LinearOperator& op, const QuantumState& state) {
  if (op.spec != state.spec) throw DimensionError("expect: spec mismatch");
  if (state.is_pure()) {
    return state.psi.dot(op.mat * state.psi);
  }
  cxd acc = 0.0;
  for (int k = 0; k < op.mat.outerSize(); ++k)
    for (SparseCxd::InnerIterator it(op.mat, k); it; ++it)
      acc += it.value() * state.rho(it.col(), it.row());
  return acc;
}

/// Real part of expect() for Hermitian observables; the imaginary residual is
/// reported through `imag_residual` when requested.
inline double expect_hermitian(const LinearOperator& op, const QuantumState& state,
                               double* imag_residual = nullptr) {
  const cxd v = expect(op, state);
  if (imag_residual) *imag_residual = std::abs(v.imag());
  return v.real();
}

/// Reduced density matrix on the kept slots (trace preserved).
inline QuantumState partial_trace(const QuantumState& state, const std::vector<int>& keep) {
  if (keep.empty()) throw DimensionError("partial_trace: empty keep set");
  const HilbertSpec& spec = state.spec;
  std::vector<int> keep_sorted(keep);
  std::sort(keep_sorted.begin(), keep_sorted.end());
  keep_sorted.erase(std::unique(keep_sorted.begin(), keep_sorted.end()), keep_sorted.end());
  for (int s : keep_sorted)
    if (s < 0 || s >= spec.n_subsystems())
      throw DimensionError("partial_trace: slot out of range");

  std::vector<int> trace_slots;
  for (int s = 0; s < spec.n_subsystems(); ++s)
    if (!std::binary_search(keep_sorted.begin(), keep_sorted.end(), s))
      trace_slots.push_back(s);

  std::vector<int> kdims, klabels_idx;
  std::vector<std::string> klabels;
  int kdim = 1;
  for (int s : keep_sorted) {
    kdims.push_back(spec.subsystem_dim(s));
    klabels.push_back(spec.labels()[s]);
    kdim *= spec.subsystem_dim(s);
  }
  int edim = 1;
  for (int s : trace_slots) edim *= spec.subsystem_dim(s);

  const MatCxd rho = state.density();
  MatCxd out = MatCxd::Zero(kdim, kdim);

  std::vector<int> local(spec.n_subsystems(), 0);
  auto compose = [&](int kidx, int eidx) {
    for (int q = static_cast<int>(keep_sorted.size()) - 1; q >= 0; --q) {
      local[keep_sorted[q]] = kidx % kdims[q];
      kidx /= kdims[q];
    }
    for (int q = static_cast<int>(trace_slots.size()) - 1; q >= 0; --q) {
      local[trace_slots[q]] = eidx % spec.subsystem_dim(trace_slots[q]);
      eidx /= spec.subsystem_dim(trace_slots[q]);
    }
    return spec.pack(local);
  };

  for (int i = 0; i < kdim; ++i) {
    for (int j = 0; j < kdim; ++j) {
      cxd acc = 0.0;
      for (int e = 0; e < edim; ++e) acc += rho(compose(i, e), compose(j, e));
      out(i, j) = acc;
    }
  }
  return QuantumState::mixed(HilbertSpec(kdims, klabels), std::move(out));
}

/// Dense exp(scale * A) for small operators (oracle backend for frame
/// transform checks). Dimensions above 64 are refused.
inline LinearOperator matrix_exp_small(const LinearOperator& op, cxd scale) {
  if (op.dim() > 64)
    throw DimensionError(
        "matrix_exp_small: dimension above dense limit (64); use an iterative method");
  MatCxd dense = MatCxd(op.mat) * scale;
  MatCxd e = dense.exp();
  SparseCxd m = e.sparseView(1.0, 1e-300);
  m.makeCompressed();
  return LinearOperator(op.spec, std::move(m));
}

/// Truncated thermal density matrix of a single mode with mean occupation
/// n_bar, normalized on the d-level ladder.
inline MatCxd thermal_mode_density(int d, double n_bar) {
  if (d < 2) throw DimensionError("thermal_mode_density: d must be >= 2");
  if (n_bar < 0) throw NumericalError("thermal_mode_density: negative occupancy");
  Eigen::VectorXd w(d);
  if (n_bar == 0.0) {
    w.setZero();
    w(0) = 1.0;
  } else {
    const double x = std::log1p(1.0 / n_bar);  // e^{-x} = nbar/(nbar+1)
    for (int k = 0; k < d; ++k) w(k) = std::exp(-x * k);
    w /= w.sum();
  }
  MatCxd rho = MatCxd::Zero(d, d);
  for (int k = 0; k < d; ++k) rho(k, k) = w(k);
  return rho;
}

}  // namespace qreset

#endif  // QRESET_OPERATORS_HPP

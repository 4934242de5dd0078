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

#ifndef QRESET_HILBERT_HPP
#define QRESET_HILBERT_HPP

#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "qreset/core.hpp"

namespace qreset {

/// Composite Hilbert space built from truncated bosonic modes and qubits.
/// Subsystem 0 is the most significant factor of the tensor-product index
/// (basis index i unpacks to local indices with the last subsystem fastest).
class HilbertSpec {
 public:
  HilbertSpec() = default;

  HilbertSpec(std::vector<int> dims, std::vector<std::string> labels)
      : dims_(std::move(dims)), labels_(std::move(labels)) {
    if (dims_.empty() || dims_.size() != labels_.size())
      throw DimensionError("HilbertSpec: dims/labels size mismatch");
    for (int d : dims_)
      if (d < 2) throw DimensionError("HilbertSpec: subsystem dim < 2");
    total_ = 1;
    for (int d : dims_) {
      if (total_ > (1 << 24) / d)
        throw DimensionError("HilbertSpec: total dimension too large");
      total_ *= d;
    }
  }

  /// The reset network layout: resonators 1..2N+2 first, then qubits 1..N.
  /// Resonators are truncated to `fock_levels` Fock states each.
  static HilbertSpec network(int n_qubits, int fock_levels) {
    if (n_qubits < 1) throw DimensionError("network: need at least one qubit");
    if (fock_levels < 2) throw DimensionError("network: fock_levels must be >= 2");
    std::vector<int> dims;
    std::vector<std::string> labels;
    const int n_res = 2 * n_qubits + 2;
    for (int m = 1; m <= n_res; ++m) {
      dims.push_back(fock_levels);
      labels.push_back("r" + std::to_string(m));
    }
    for (int n = 1; n <= n_qubits; ++n) {
      dims.push_back(2);
      labels.push_back("q" + std::to_string(n));
    }
    return HilbertSpec(std::move(dims), std::move(labels));
  }

  int dim() const { return total_; }
  int n_subsystems() const { return static_cast<int>(dims_.size()); }
  int subsystem_dim(int slot) const { return dims_.at(slot); }
  const std::vector<int>& dims() const { return dims_; }
  const std::vector<std::string>& labels() const { return labels_; }

  int n_qubits() const {
    int n = 0;
    for (const auto& l : labels_) n += (l[0] == 'q');
    return n;
  }
  int n_resonators() const {
    int n = 0;
    for (const auto& l : labels_) n += (l[0] == 'r');
    return n;
  }

  /// Slot of resonator m (1-based network index).
  int resonator_slot(int m) const { return find_label("r" + std::to_string(m)); }
  /// Slot of qubit n (1-based network index).
  int qubit_slot(int n) const { return find_label("q" + std::to_string(n)); }

  /// Product of subsystem dims strictly before / after `slot`.
  int prefix_dim(int slot) const {
    int p = 1;
    for (int k = 0; k < slot; ++k) p *= dims_[k];
    return p;
  }
  int suffix_dim(int slot) const {
    int s = 1;
    for (int k = slot + 1; k < n_subsystems(); ++k) s *= dims_[k];
    return s;
  }

  void unpack(int index, std::vector<int>& local) const {
    local.resize(dims_.size());
    for (int k = n_subsystems() - 1; k >= 0; --k) {
      local[k] = index % dims_[k];
      index /= dims_[k];
    }
  }
  int pack(const std::vector<int>& local) const {
    int idx = 0;
    for (int k = 0; k < n_subsystems(); ++k) idx = idx * dims_[k] + local[k];
    return idx;
  }

  bool operator==(const HilbertSpec& o) const {
    return dims_ == o.dims_ && labels_ == o.labels_;
  }
  bool operator!=(const HilbertSpec& o) const { return !(*this == o); }

 private:
  int find_label(const std::string& l) const {
    for (int k = 0; k < n_subsystems(); ++k)
      if (labels_[k] == l) return k;
    throw DimensionError("HilbertSpec: no subsystem labelled " + l);
  }

  std::vector<int> dims_;
  std::vector<std::string> labels_;
  int total_ = 0;
};

/// Sparse complex operator tied to a HilbertSpec. Assembly is deterministic:
/// identical inputs produce bit-identical compressed storage.
struct LinearOperator {
  HilbertSpec spec;
  SparseCxd mat;

  LinearOperator() = default;
  LinearOperator(HilbertSpec s, SparseCxd m) : spec(std::move(s)), mat(std::move(m)) {
    if (mat.rows() != spec.dim() || mat.cols() != spec.dim())
      throw DimensionError("LinearOperator: matrix does not match spec dimension");
  }

  int dim() const { return spec.dim(); }

  LinearOperator adjoint() const {
    SparseCxd a = mat.adjoint();
    a.makeCompressed();
    return LinearOperator(spec, std::move(a));
  }

  double hermiticity_residual() const {
    SparseCxd d = SparseCxd(mat - SparseCxd(mat.adjoint()));
    double r = 0.0;
    for (int k = 0; k < d.outerSize(); ++k)
      for (SparseCxd::InnerIterator it(d, k); it; ++it)
        r = std::max(r, std::abs(it.value()));
    return r;
  }
  bool is_hermitian(double tol = 1e-12) const { return hermiticity_residual() < tol; }

  MatCxd dense() const { return MatCxd(mat); }

  friend LinearOperator operator+(const LinearOperator& a, const LinearOperator& b) {
    if (a.spec != b.spec) throw DimensionError("operator+: spec mismatch");
    SparseCxd m = a.mat + b.mat;
    m.makeCompressed();
    return LinearOperator(a.spec, std::move(m));
  }
  friend LinearOperator operator-(const LinearOperator& a, const LinearOperator& b) {
    if (a.spec != b.spec) throw DimensionError("operator-: spec mismatch");
    SparseCxd m = a.mat - b.mat;
    m.makeCompressed();
    return LinearOperator(a.spec, std::move(m));
  }
  friend LinearOperator operator*(const LinearOperator& a, const LinearOperator& b) {
    if (a.spec != b.spec) throw DimensionError("operator*: spec mismatch");
    SparseCxd m = a.mat * b.mat;
    m.makeCompressed();
    return LinearOperator(a.spec, std::move(m));
  }
  friend LinearOperator operator*(cxd s, const LinearOperator& a) {
    SparseCxd m = s * a.mat;
    m.makeCompressed();
    return LinearOperator(a.spec, std::move(m));
  }
};

/// Pure state (complex vector) or density matrix on a composite space.
struct QuantumState {
  enum class Kind { Pure, Mixed };

  HilbertSpec spec;
  Kind kind = Kind::Pure;
  VecCxd psi;   // valid when kind == Pure
  MatCxd rho;   // valid when kind == Mixed

  static QuantumState pure(HilbertSpec s, VecCxd v) {
    if (v.size() != s.dim()) throw DimensionError("QuantumState::pure: size mismatch");
    QuantumState q;
    q.spec = std::move(s);
    q.kind = Kind::Pure;
    q.psi = std::move(v);
    return q;
  }

  static QuantumState mixed(HilbertSpec s, MatCxd m) {
    if (m.rows() != s.dim() || m.cols() != s.dim())
      throw DimensionError("QuantumState::mixed: size mismatch");
    QuantumState q;
    q.spec = std::move(s);
    q.kind = Kind::Mixed;
    q.rho = std::move(m);
    return q;
  }

  bool is_pure() const { return kind == Kind::Pure; }

  MatCxd density() const {
    if (kind == Kind::Mixed) return rho;
    return psi * psi.adjoint();
  }

  double norm_residual() const {
    if (kind == Kind::Pure) return std::abs(psi.norm() - 1.0);
    return std::abs(rho.trace().real() - 1.0) + std::abs(rho.trace().imag());
  }
  double hermiticity_residual() const {
    if (kind == Kind::Pure) return 0.0;
    return (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  }
  double min_eigenvalue() const {
    if (kind == Kind::Pure) return 0.0;
    Eigen::SelfAdjointEigenSolver<MatCxd> es(0.5 * (rho + rho.adjoint()),
                                             Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }
};

}  // namespace qreset

#endif  // QRESET_HILBERT_HPP

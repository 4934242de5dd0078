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

#ifndef QRESET_CIRCUIT_HPP
#define QRESET_CIRCUIT_HPP

#include <array>
#include <cmath>
#include <map>
#include <vector>

#include "qreset/operators.hpp"

namespace qreset {

enum class TempConvention { Physical, Paper };

/// Network constants. Frequencies are stored as f = omega/2pi (GHz for the
/// carriers, MHz for couplings and rates); conversion to angular rad/us
/// happens once, inside the model builders.
struct CircuitParams {
  int n_qubits = 1;
  double f_c_ghz = 6.0;        // resonator frequency omega_c/2pi
  double f_l_ghz = 5.7;        // drive frame frequency omega_L/2pi
  double v_mhz = 100.0;        // filter-filter coupling v/2pi
  double g_mhz = 2.0;          // qubit-filter coupling g/2pi
  double kappa_mhz = 20.0;     // resonator decay kappa/2pi
  double t_c_kelvin = 0.0;     // bath temperature
  int fock_levels = 2;         // resonator truncation d
  TempConvention temp_convention = TempConvention::Paper;

  int n_resonators() const { return 2 * n_qubits + 2; }
  double delta_omega_mhz() const { return (f_c_ghz - f_l_ghz) * 1e3; }

  double delta_omega_ang() const { return mhz_to_rad_us(delta_omega_mhz()); }
  double v_ang() const { return mhz_to_rad_us(v_mhz); }
  double g_ang() const { return mhz_to_rad_us(g_mhz); }
  double kappa_ang() const { return mhz_to_rad_us(kappa_mhz); }

  void validate() const {
    if (n_qubits < 1) throw ConfigError("circuit.n_qubits: must be >= 1");
    if (f_c_ghz <= 0) throw ConfigError("circuit.f_c_ghz: must be positive");
    if (f_l_ghz <= 0) throw ConfigError("circuit.f_l_ghz: must be positive");
    if (v_mhz <= 0) throw ConfigError("circuit.v_mhz: must be positive");
    if (g_mhz <= 0) throw ConfigError("circuit.g_mhz: must be positive");
    if (kappa_mhz <= 0) throw ConfigError("circuit.kappa_mhz: must be positive");
    if (t_c_kelvin < 0) throw ConfigError("circuit.t_c_kelvin: must be >= 0");
    if (fock_levels < 2) throw ConfigError("circuit.fock_levels: must be >= 2");
    if (delta_omega_mhz() <= 0)
      throw ConfigError("circuit: requires f_c_ghz > f_l_ghz (positive detuning)");
  }

  HilbertSpec space() const { return HilbertSpec::network(n_qubits, fock_levels); }
};

/// Bloch-sphere reset target (theta, phi) for one qubit. The target state is
/// cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>.
struct QubitTarget {
  double theta = 0.0;  // [0, pi]
  double phi = 0.0;    // [0, 2pi)

  void validate() const {
    if (!(theta >= 0.0 && theta <= pi)) throw ConfigError("target.theta: out of [0, pi]");
    if (!(phi >= 0.0 && phi < two_pi)) throw ConfigError("target.phi: out of [0, 2pi)");
  }
};

/// Calibrated drive for one qubit: Rabi components, detuning and the qubit
/// frequency realizing a Bloch target at effective Rabi frequency omega_bar.
struct DriveSetting {
  double omega_re_mhz = 0.0;     // Re(Omega)/2pi
  double omega_im_mhz = 0.0;     // Im(Omega)/2pi
  double delta_varpi_mhz = 0.0;  // detuning (omega_n - omega_L)/2pi
  double f_n_ghz = 0.0;          // qubit frequency omega_n/2pi
  double omega_bar_mhz = 0.0;    // effective Rabi Omega_bar/2pi

  cxd omega_mhz() const { return {omega_re_mhz, omega_im_mhz}; }
};

inline double effective_rabi(const DriveSetting& d) {
  return std::sqrt(std::norm(d.omega_mhz()) + 0.25 * d.delta_varpi_mhz * d.delta_varpi_mhz);
}

/// Drive settings for a Bloch target:
///   Omega = omega_bar sin(theta) e^{i(pi - phi)},
///   delta_varpi = 2 omega_bar cos(theta),  omega_n = omega_L + delta_varpi.
inline DriveSetting calibrate_drive(const QubitTarget& target, double omega_bar_mhz,
                                    double f_l_ghz) {
  if (omega_bar_mhz <= 0) throw ConfigError("calibrate_drive: omega_bar must be positive");
  DriveSetting d;
  d.omega_bar_mhz = omega_bar_mhz;
  d.omega_re_mhz = -omega_bar_mhz * std::sin(target.theta) * std::cos(target.phi);
  d.omega_im_mhz = omega_bar_mhz * std::sin(target.theta) * std::sin(target.phi);
  d.delta_varpi_mhz = 2.0 * omega_bar_mhz * std::cos(target.theta);
  d.f_n_ghz = f_l_ghz + d.delta_varpi_mhz * 1e-3;
  return d;
}

/// Largest deviation of the defined calibration ratios from omega_bar
/// (relative), plus the omega_bar^2 identity residual.
inline double drive_calibration_residual(const QubitTarget& t, const DriveSetting& d) {
  const double wb = d.omega_bar_mhz;
  double r = 0.0;
  const double sc = std::sin(t.theta) * std::cos(t.phi);
  const double ss = std::sin(t.theta) * std::sin(t.phi);
  const double c2 = 2.0 * std::cos(t.theta);
  if (std::abs(sc) > 1e-12) r = std::max(r, std::abs(-d.omega_re_mhz / sc - wb) / wb);
  if (std::abs(ss) > 1e-12) r = std::max(r, std::abs(d.omega_im_mhz / ss - wb) / wb);
  if (std::abs(c2) > 1e-12) r = std::max(r, std::abs(2.0 * d.delta_varpi_mhz / (2.0 * c2) - wb) / wb);
  r = std::max(r, std::abs(effective_rabi(d) - wb) / wb);
  return r;
}

/// The three rotated Pauli operators sigma_{x,y,z}^(z) for a target, obtained
/// from the SO(3) rotation
///   [ cos t cos p, -cos t sin p, sin t ]
///   [ sin p,        cos p,       0     ]
///   [ -sin t cos p, sin t sin p, cos t ]
/// acting on (sigma_x, sigma_y, sigma_z).
struct RotatedPaulis {
  LinearOperator x, y, z;

  LinearOperator plus() const {
    return LinearOperator(x.spec, SparseCxd(0.5 * (x.mat + iu * y.mat)));
  }
  LinearOperator minus() const {
    return LinearOperator(x.spec, SparseCxd(0.5 * (x.mat - iu * y.mat)));
  }
};

inline Eigen::Matrix3d pauli_rotation_matrix(const QubitTarget& t) {
  const double ct = std::cos(t.theta), st = std::sin(t.theta);
  const double cp = std::cos(t.phi), sp = std::sin(t.phi);
  Eigen::Matrix3d r;
  r << ct * cp, -ct * sp, st,
       sp, cp, 0.0,
       -st * cp, st * sp, ct;
  return r;
}

inline RotatedPaulis rotated_pauli(const QubitTarget& target) {
  const Eigen::Matrix3d r = pauli_rotation_matrix(target);
  const LinearOperator sx = pauli(PauliAxis::X);
  const LinearOperator sy = pauli(PauliAxis::Y);
  const LinearOperator sz = pauli(PauliAxis::Z);
  auto row = [&](int i) {
    SparseCxd m = r(i, 0) * sx.mat + r(i, 1) * sy.mat + r(i, 2) * sz.mat;
    m.makeCompressed();
    return LinearOperator(sx.spec, std::move(m));
  };
  return RotatedPaulis{row(0), row(1), row(2)};
}

/// Eigenvector of sigma_z^(z) with eigenvalue -1 (the reset target state),
/// phase-fixed so the first nonzero amplitude is real positive, together with
/// the residual ||sigma_z^(z) |psi> + |psi>||.
inline std::pair<VecCxd, double> verify_target_eigenstate(const QubitTarget& target) {
  const RotatedPaulis rp = rotated_pauli(target);
  const MatCxd sz = rp.z.dense();
  Eigen::SelfAdjointEigenSolver<MatCxd> es(sz);
  // Eigenvalues are sorted ascending; the -1 branch comes first.
  VecCxd v = es.eigenvectors().col(0);
  for (int k = 0; k < v.size(); ++k) {
    if (std::abs(v(k)) > 1e-12) {
      v *= std::conj(v(k)) / std::abs(v(k));
      break;
    }
  }
  const double residual = (sz * v + v).norm();
  return {v, residual};
}

/// Rotating-frame network Hamiltonian (angular rad/us): resonator detunings,
/// nearest-pair hopping v on pairs (2k-1, 2k), per-qubit drive terms and the
/// qubit-filter couplings g(a_{2n}^+ + a_{2n+1}^+) sigma_-^n + h.c.
inline LinearOperator build_h1(const CircuitParams& params,
                               const std::vector<DriveSetting>& drives) {
  params.validate();
  if (static_cast<int>(drives.size()) != params.n_qubits)
    throw DimensionError("build_h1: drives length must equal qubit count");

  const HilbertSpec spec = params.space();
  const int d = params.fock_levels;
  const LinearOperator a = destroy(d);
  const LinearOperator ad = a.adjoint();

  const double dw = params.delta_omega_ang();
  const double v = params.v_ang();
  const double g = params.g_ang();

  SparseCxd h(spec.dim(), spec.dim());

  const LinearOperator n_op = ad * a;
  for (int m = 1; m <= params.n_resonators(); ++m)
    h = h + dw * embed(n_op, spec.resonator_slot(m), spec).mat;

  for (int k = 1; k <= params.n_qubits + 1; ++k) {
    const auto lower = embed(a, spec.resonator_slot(2 * k - 1), spec);
    const auto raise = embed(ad, spec.resonator_slot(2 * k), spec);
    SparseCxd hop = v * SparseCxd(lower.mat * raise.mat);
    h = h + hop + SparseCxd(hop.adjoint());
  }

  for (int n = 1; n <= params.n_qubits; ++n) {
    const int qs = spec.qubit_slot(n);
    const DriveSetting& dr = drives[n - 1];
    h = h + mhz_to_rad_us(dr.omega_re_mhz) * embed(pauli(PauliAxis::X), qs, spec).mat;
    h = h + mhz_to_rad_us(dr.omega_im_mhz) * embed(pauli(PauliAxis::Y), qs, spec).mat;
    h = h + (0.5 * mhz_to_rad_us(dr.delta_varpi_mhz)) *
                embed(pauli(PauliAxis::Z), qs, spec).mat;

    const auto sm = embed(pauli(PauliAxis::Minus), qs, spec);
    SparseCxd coupling =
        g * SparseCxd((embed(ad, spec.resonator_slot(2 * n), spec).mat +
                       embed(ad, spec.resonator_slot(2 * n + 1), spec).mat) *
                      sm.mat);
    h = h + coupling + SparseCxd(coupling.adjoint());
  }

  h.makeCompressed();
  return LinearOperator(spec, std::move(h));
}

/// The six interaction-frame mode frequencies omega_{lk} = delta_omega + l v
/// + 2 k omega_bar (MHz) and the cooling detuning Delta = omega_{-1,-1}.
struct ModeSpectrum {
  // Indexed by (l, k) with l in {-1,+1}, k in {-1,0,+1}.
  std::map<std::pair<int, int>, double> omega_mhz;
  double delta_mhz = 0.0;

  double at(int l, int k) const { return omega_mhz.at({l, k}); }
};

inline ModeSpectrum mode_frequencies(const CircuitParams& params, double omega_bar_mhz) {
  ModeSpectrum s;
  const double dw = params.delta_omega_mhz();
  for (int l : {-1, 1})
    for (int k : {-1, 0, 1})
      s.omega_mhz[{l, k}] = dw + l * params.v_mhz + 2.0 * k * omega_bar_mhz;
  s.delta_mhz = s.at(-1, -1);
  return s;
}

/// Bare-basis weights A^l_{mn} of the qubit-filter coupling on each hopping
/// branch, with the Bloch-angle coefficients Theta. The weights come from
/// numerically diagonalizing each hopping pair into its delta_omega +/- v
/// modes, so the support/normalization structure is derived, not assumed.
struct CouplingTable {
  int n_qubits = 0;
  int n_resonators = 0;
  double g_mhz = 0.0;
  // a_weights[l][m][n] for l = -1 (index 0) and +1 (index 1); m, n 0-based.
  std::array<Eigen::MatrixXd, 2> a_weights;
  std::vector<cxd> theta_minus;  // e^{i phi}(cos theta + 1)/2 per qubit
  std::vector<cxd> theta_plus;   // e^{i phi}(cos theta - 1)/2 per qubit

  static int branch_index(int l) {
    if (l == -1) return 0;
    if (l == +1) return 1;
    throw DimensionError("CouplingTable: branch l must be -1 or +1");
  }

  double a(int l, int m, int n) const { return a_weights[branch_index(l)](m - 1, n - 1); }

  /// Theta^l_{mn} = g A^l_{mn} Theta_-^n, in MHz (follows g's unit).
  cxd theta_mn_mhz(int l, int m, int n) const {
    return g_mhz * a(l, m, n) * theta_minus[n - 1];
  }

  double sum_abs2_theta_ang(int l, int n) const {
    double acc = 0.0;
    for (int m = 1; m <= n_resonators; ++m)
      acc += std::norm(mhz_to_rad_us(1.0) * theta_mn_mhz(l, m, n));
    return acc;
  }
};

inline CouplingTable coupling_coefficients(const CircuitParams& params,
                                           const std::vector<QubitTarget>& targets) {
  params.validate();
  if (static_cast<int>(targets.size()) != params.n_qubits)
    throw DimensionError("coupling_coefficients: targets length must equal qubit count");

  CouplingTable table;
  table.n_qubits = params.n_qubits;
  table.n_resonators = params.n_resonators();
  table.g_mhz = params.g_mhz;
  table.a_weights[0] = Eigen::MatrixXd::Zero(table.n_resonators, table.n_qubits);
  table.a_weights[1] = Eigen::MatrixXd::Zero(table.n_resonators, table.n_qubits);

  // Per pair (2k-1, 2k): modes of [[dw, v], [v, dw]], phase-fixed with the
  // first component positive. Branch +1 is the eigenvalue dw + v, branch -1
  // is dw - v.
  Eigen::Matrix2d pair_h;
  pair_h << params.delta_omega_mhz(), params.v_mhz, params.v_mhz, params.delta_omega_mhz();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(pair_h);
  std::array<Eigen::Vector2d, 2> mode;  // [0] -> branch -1, [1] -> branch +1
  for (int j = 0; j < 2; ++j) {
    Eigen::Vector2d vjc = es.eigenvectors().col(j);
    if (vjc(0) < 0) vjc = -vjc;
    const int branch = (es.eigenvalues()(j) > params.delta_omega_mhz()) ? 1 : 0;
    mode[branch] = vjc;
  }

  for (int n = 1; n <= params.n_qubits; ++n) {
    // Qubit n couples to resonator 2n (second member of pair n) and 2n+1
    // (first member of pair n+1).
    struct Contact {
      int pair;    // 1-based pair index
      int member;  // 0 = first member (2 pair - 1), 1 = second member (2 pair)
    };
    const Contact contacts[2] = {{n, 1}, {n + 1, 0}};
    for (int b = 0; b < 2; ++b) {
      for (const Contact& c : contacts) {
        // Coupling amplitude onto this pair's branch-b mode, pushed back to
        // the two bare resonators of the pair.
        const double amp = mode[b](c.member);
        const int first = 2 * c.pair - 1;
        table.a_weights[b](first - 1, n - 1) += amp * mode[b](0);
        table.a_weights[b](first, n - 1) += amp * mode[b](1);
      }
    }
    const QubitTarget& t = targets[n - 1];
    const cxd phase = std::exp(iu * t.phi);
    table.theta_minus.push_back(phase * (std::cos(t.theta) + 1.0) * 0.5);
    table.theta_plus.push_back(phase * (std::cos(t.theta) - 1.0) * 0.5);
  }
  return table;
}

/// Resonant effective interaction (angular rad/us):
///   H_I = sum_n sum_m Theta^{-1}_{mn} a_m^+ sigma_-^{n(z)} + h.c.
/// For Delta != 0 the equivalent static frame adds -Delta sum_m a_m^+ a_m.
inline LinearOperator build_effective_interaction(const CircuitParams& params,
                                                  const std::vector<QubitTarget>& targets,
                                                  double delta_mhz = 0.0) {
  const CouplingTable table = coupling_coefficients(params, targets);
  const HilbertSpec spec = params.space();
  const LinearOperator a = destroy(params.fock_levels);
  const LinearOperator ad = a.adjoint();

  SparseCxd h(spec.dim(), spec.dim());
  for (int n = 1; n <= params.n_qubits; ++n) {
    const RotatedPaulis rp = rotated_pauli(targets[n - 1]);
    const auto sm = embed(rp.minus(), spec.qubit_slot(n), spec);
    for (int m = 1; m <= params.n_resonators(); ++m) {
      const cxd theta = mhz_to_rad_us(1.0) * table.theta_mn_mhz(-1, m, n);
      if (theta == cxd(0.0, 0.0)) continue;
      SparseCxd term =
          theta * SparseCxd(embed(ad, spec.resonator_slot(m), spec).mat * sm.mat);
      h = h + term + SparseCxd(term.adjoint());
    }
  }
  if (delta_mhz != 0.0) {
    const LinearOperator n_op = ad * a;
    for (int m = 1; m <= params.n_resonators(); ++m)
      h = h - mhz_to_rad_us(delta_mhz) * embed(n_op, spec.resonator_slot(m), spec).mat;
  }
  h.makeCompressed();
  return LinearOperator(spec, std::move(h));
}

/// Residuals of the interaction-frame transformation identities, computed by
/// dense matrix exponentials on a one-pair + one-qubit system and compared
/// against the closed forms (qubit ladder phases e^{+-2 i t omega_bar}; pair
/// modes at delta_omega +- v). Frequencies in MHz, t in us.
struct FrameTransformResiduals {
  double sigma_x = 0.0;
  double sigma_y = 0.0;
  double a_first = 0.0;   // creation operator of the pair's first resonator
  double a_second = 0.0;  // creation operator of the pair's second resonator

  double max() const {
    return std::max(std::max(sigma_x, sigma_y), std::max(a_first, a_second));
  }
};

inline FrameTransformResiduals frame_transform_oracle(double omega_bar_mhz, double v_mhz,
                                                      double delta_omega_mhz, double t_us,
                                                      const QubitTarget& target = {}) {
  const int d = 4;  // per-mode truncation of the oracle system
  const HilbertSpec spec({d, d, 2}, {"r1", "r2", "q1"});
  const LinearOperator a = destroy(d);
  const LinearOperator ad = a.adjoint();
  const LinearOperator a1 = embed(a, 0, spec);
  const LinearOperator a2 = embed(a, 1, spec);
  const LinearOperator n1 = embed(ad * a, 0, spec);
  const LinearOperator n2 = embed(ad * a, 1, spec);

  const RotatedPaulis rp = rotated_pauli(target);
  const LinearOperator szr = embed(rp.z, 2, spec);
  const LinearOperator sxr = embed(rp.x, 2, spec);
  const LinearOperator syr = embed(rp.y, 2, spec);
  const LinearOperator spr = embed(rp.plus(), 2, spec);
  const LinearOperator smr = embed(rp.minus(), 2, spec);

  const double wb = mhz_to_rad_us(omega_bar_mhz);
  const double v = mhz_to_rad_us(v_mhz);
  const double dw = mhz_to_rad_us(delta_omega_mhz);

  SparseCxd r2m = wb * szr.mat + dw * (n1.mat + n2.mat);
  {
    SparseCxd hop = v * SparseCxd(a1.mat * SparseCxd(a2.adjoint().mat));
    r2m = r2m + hop + SparseCxd(hop.adjoint());
  }
  const LinearOperator r2(spec, r2m);
  const MatCxd u = matrix_exp_small(r2, iu * t_us).dense();
  const MatCxd udag = matrix_exp_small(r2, -iu * t_us).dense();

  auto transformed = [&](const LinearOperator& x) { return MatCxd(u * x.dense() * udag); };

  FrameTransformResiduals res;
  const cxd e2p = std::exp(iu * (2.0 * wb * t_us));
  const cxd e2m = std::exp(-iu * (2.0 * wb * t_us));
  res.sigma_x = (transformed(sxr) - (e2p * spr.dense() + e2m * smr.dense()))
                    .cwiseAbs()
                    .maxCoeff();
  res.sigma_y = (transformed(syr) - (iu * (e2m * smr.dense() - e2p * spr.dense())))
                    .cwiseAbs()
                    .maxCoeff();

  // The closed pair-mode forms assume the untruncated ladder; compare on the
  // subspace whose image stays below the Fock cutoff (total photons <= d-2).
  MatCxd proj = MatCxd::Zero(spec.dim(), spec.dim());
  std::vector<int> local;
  for (int i = 0; i < spec.dim(); ++i) {
    spec.unpack(i, local);
    if (local[0] + local[1] <= d - 2) proj(i, i) = 1.0;
  }

  const cxd ep = std::exp(iu * ((dw + v) * t_us));
  const cxd em = std::exp(iu * ((dw - v) * t_us));
  const MatCxd a1d = a1.adjoint().dense();
  const MatCxd a2d = a2.adjoint().dense();
  const MatCxd sum = a1d + a2d;
  const MatCxd diff = a1d - a2d;
  res.a_first =
      ((transformed(a1.adjoint()) - 0.5 * (ep * sum + em * diff)) * proj).cwiseAbs().maxCoeff();
  res.a_second =
      ((transformed(a2.adjoint()) - 0.5 * (ep * sum - em * diff)) * proj).cwiseAbs().maxCoeff();
  return res;
}

}  // namespace qreset

#endif  // QRESET_CIRCUIT_HPP

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

#ifndef QRESET_SCENARIO_HPP
#define QRESET_SCENARIO_HPP

#include <functional>
#include <string>
#include <vector>

#include "qreset/output.hpp"

namespace qreset {

/// Step cap resolving the fastest interaction-frame beat: 1/(20 f_max) with
/// f_max the largest |omega_lk| in MHz (cycles per us).
inline double dt_cap_from_modes(const CircuitParams& params, double omega_bar_mhz) {
  const ModeSpectrum modes = mode_frequencies(params, omega_bar_mhz);
  double f_max = 0.0;
  for (const auto& [lk, f] : modes.omega_mhz) f_max = std::max(f_max, std::abs(f));
  if (f_max <= 0.0) return 0.0;
  return 1.0 / (20.0 * f_max);
}

namespace detail {

inline VecCxd basis_vec(int dim, int k) {
  VecCxd v = VecCxd::Zero(dim);
  v(k) = 1.0;
  return v;
}

inline VecCxd bloch_vec(const QubitTarget& t) {
  VecCxd v(2);
  v(0) = std::cos(0.5 * t.theta);
  v(1) = std::exp(iu * t.phi) * std::sin(0.5 * t.theta);
  return v;
}

struct SlotInitial {
  // Possible local vectors with draw weights; a single entry means no draw.
  std::vector<VecCxd> states;
  std::vector<double> weights;

  bool random() const { return states.size() > 1; }
};

inline std::vector<SlotInitial> slot_initials(const ExperimentConfig& cfg, double n_bar) {
  const HilbertSpec spec = cfg.circuit.space();
  const int d = cfg.circuit.fock_levels;
  std::vector<SlotInitial> slots;
  for (int s = 0; s < spec.n_subsystems(); ++s) {
    SlotInitial si;
    if (spec.labels()[s][0] == 'r') {
      if (cfg.initial.resonators == InitialResonators::Vacuum || n_bar <= 0.0) {
        si.states.push_back(basis_vec(d, 0));
        si.weights.push_back(1.0);
      } else {
        const MatCxd rho = thermal_mode_density(d, n_bar);
        for (int k = 0; k < d; ++k) {
          si.states.push_back(basis_vec(d, k));
          si.weights.push_back(rho(k, k).real());
        }
      }
    } else {
      const int n = std::atoi(spec.labels()[s].c_str() + 1);  // qubit index
      switch (cfg.initial.qubits) {
        case InitialQubits::Ground:
          si.states.push_back(basis_vec(2, 0));
          si.weights.push_back(1.0);
          break;
        case InitialQubits::Bloch:
          si.states.push_back(bloch_vec(cfg.initial.bloch[n - 1]));
          si.weights.push_back(1.0);
          break;
        case InitialQubits::MixedRotated: {
          // Eigenstates of the rotated sigma_z for this qubit's target.
          const MatCxd sz = rotated_pauli(cfg.targets[n - 1]).z.dense();
          Eigen::SelfAdjointEigenSolver<MatCxd> es(sz);
          for (int c = 0; c < 2; ++c) {
            VecCxd v = es.eigenvectors().col(c);
            for (int k = 0; k < 2; ++k)
              if (std::abs(v(k)) > 1e-12) {
                v *= std::conj(v(k)) / std::abs(v(k));
                break;
              }
            si.states.push_back(v);
            si.weights.push_back(0.5);
          }
          break;
        }
      }
    }
    slots.push_back(std::move(si));
  }
  return slots;
}

inline MatCxd initial_density(const ExperimentConfig& cfg, double n_bar) {
  const std::vector<SlotInitial> slots = slot_initials(cfg, n_bar);
  MatCxd rho = MatCxd::Identity(1, 1);
  for (const auto& si : slots) {
    const int d = static_cast<int>(si.states[0].size());
    MatCxd local = MatCxd::Zero(d, d);
    for (size_t k = 0; k < si.states.size(); ++k)
      local += si.weights[k] * (si.states[k] * si.states[k].adjoint());
    MatCxd next(rho.rows() * d, rho.cols() * d);
    for (int i = 0; i < rho.rows(); ++i)
      for (int j = 0; j < rho.cols(); ++j)
        next.block(i * d, j * d, d, d) = rho(i, j) * local;
    rho = std::move(next);
  }
  return rho;
}

/// Sampler drawing per-slot states in slot order (one uniform per random
/// slot), plus the union support of everything it can produce.
inline std::pair<InitialSampler, std::vector<int>> initial_sampler(const ExperimentConfig& cfg,
                                                                   double n_bar) {
  const HilbertSpec spec = cfg.circuit.space();
  auto slots = std::make_shared<std::vector<SlotInitial>>(slot_initials(cfg, n_bar));

  std::vector<std::vector<int>> slot_support;
  for (const auto& si : *slots) {
    std::vector<int> sup;
    for (size_t k = 0; k < si.states.size(); ++k)
      for (int i = 0; i < si.states[k].size(); ++i)
        if (std::abs(si.states[k](i)) > 0.0 && si.weights[k] > 0.0) sup.push_back(i);
    std::sort(sup.begin(), sup.end());
    sup.erase(std::unique(sup.begin(), sup.end()), sup.end());
    slot_support.push_back(std::move(sup));
  }
  std::vector<int> support;
  std::vector<int> local(spec.n_subsystems(), 0);
  std::function<void(int)> enumerate = [&](int s) {
    if (s == spec.n_subsystems()) {
      support.push_back(spec.pack(local));
      return;
    }
    for (int i : slot_support[s]) {
      local[s] = i;
      enumerate(s + 1);
    }
  };
  enumerate(0);
  std::sort(support.begin(), support.end());

  const int dim = spec.dim();
  HilbertSpec spec_copy = spec;
  InitialSampler sampler = [slots, spec_copy, dim](std::mt19937_64& rng) {
    std::vector<const VecCxd*> chosen;
    chosen.reserve(slots->size());
    for (const auto& si : *slots) {
      if (!si.random()) {
        chosen.push_back(&si.states[0]);
        continue;
      }
      double u = qreset::detail::uniform01(rng);
      size_t pick = si.states.size() - 1;
      for (size_t k = 0; k < si.states.size(); ++k) {
        if (u < si.weights[k]) {
          pick = k;
          break;
        }
        u -= si.weights[k];
      }
      chosen.push_back(&si.states[pick]);
    }
    VecCxd out(dim);
    std::vector<int> loc(spec_copy.n_subsystems(), 0);
    for (int i = 0; i < dim; ++i) {
      spec_copy.unpack(i, loc);
      cxd amp = 1.0;
      for (size_t s = 0; s < chosen.size(); ++s) amp *= (*chosen[s])(loc[s]);
      out(i) = amp;
    }
    return out;
  };
  return {std::move(sampler), std::move(support)};
}

inline std::vector<Observable> build_observables(const ExperimentConfig& cfg) {
  const HilbertSpec spec = cfg.circuit.space();
  const LinearOperator a = destroy(cfg.circuit.fock_levels);
  const LinearOperator n_op = a.adjoint() * a;
  std::vector<Observable> obs;
  for (const std::string& label : cfg.observables) {
    if (label == "sz_rot" || label == "sx_rot" || label == "sy_rot") {
      for (int n = 1; n <= cfg.circuit.n_qubits; ++n) {
        const RotatedPaulis rp = rotated_pauli(cfg.targets[n - 1]);
        const LinearOperator& p = label == "sz_rot" ? rp.z : (label == "sx_rot" ? rp.x : rp.y);
        obs.push_back({label, n, embed(p, spec.qubit_slot(n), spec)});
      }
    } else if (label == "n_total" || label == "n_exc_rot") {
      SparseCxd m(spec.dim(), spec.dim());
      for (int r = 1; r <= 2 * cfg.circuit.n_qubits + 2; ++r)
        m = m + embed(n_op, spec.resonator_slot(r), spec).mat;
      if (label == "n_exc_rot") {
        SparseCxd id(spec.dim(), spec.dim());
        id.setIdentity();
        for (int n = 1; n <= cfg.circuit.n_qubits; ++n) {
          const RotatedPaulis rp = rotated_pauli(cfg.targets[n - 1]);
          m = m + 0.5 * SparseCxd(embed(rp.z, spec.qubit_slot(n), spec).mat + id);
        }
      }
      m.makeCompressed();
      obs.push_back({label, 0, LinearOperator(spec, std::move(m))});
    }
  }
  return obs;
}

inline double initial_sz_rot(const ExperimentConfig& cfg, int n) {
  switch (cfg.initial.qubits) {
    case InitialQubits::MixedRotated:
      return 0.0;
    case InitialQubits::Ground: {
      const MatCxd sz = rotated_pauli(cfg.targets[n - 1]).z.dense();
      return sz(0, 0).real();
    }
    case InitialQubits::Bloch: {
      const VecCxd psi = bloch_vec(cfg.initial.bloch[n - 1]);
      const MatCxd sz = rotated_pauli(cfg.targets[n - 1]).z.dense();
      return psi.dot(sz * psi).real();
    }
  }
  return 0.0;
}

}  // namespace detail

struct RunDiagnostics {
  MasterDiagnostics master;
  TrajectoryDiagnostics traj;
  bool has_master = false;
  bool has_traj = false;
};

/// Runs one configured experiment with the configured solver and returns the
/// observable table. Fully reproducible from the config (and its seed).
inline ResultTable run_experiment(const ExperimentConfig& cfg_in,
                                  RunDiagnostics* diag = nullptr) {
  ExperimentConfig cfg = cfg_in;
  cfg.validate();
  const double n_bar = thermal_occupancy(cfg.circuit.f_c_ghz, cfg.circuit.t_c_kelvin,
                                         cfg.circuit.temp_convention);

  SimOptions sim = cfg.sim;
  if (sim.sample_times.empty()) sim.sample_times = sim.samples_or_default(cfg.sample_count);
  if (sim.dt_max_us == 0.0 && cfg.solver != SolverKind::Rate)
    sim.dt_max_us = dt_cap_from_modes(cfg.circuit, cfg.drive_omega_bar_mhz);

  ResultTable table;
  if (cfg.solver == SolverKind::Rate) {
    for (const std::string& label : cfg.observables)
      if (label != "sz_rot")
        throw ConfigError("run.observables: rate solver supports only sz_rot");
    const ModeSpectrum modes = mode_frequencies(cfg.circuit, cfg.drive_omega_bar_mhz);
    const double delta = mhz_to_rad_us(modes.delta_mhz);
    for (double t : sim.sample_times) {
      for (int n = 1; n <= cfg.circuit.n_qubits; ++n) {
        const double gamma = polarization_rate(cfg.targets[n - 1].theta, delta,
                                               cfg.circuit.g_ang(), cfg.circuit.kappa_ang());
        const double sz0 = detail::initial_sz_rot(cfg, n);
        PopulationVector p0;
        p0.p_plus = 0.5 * (1.0 + sz0);
        p0.p_minus = 1.0 - p0.p_plus;
        const PopulationVector p = evolve_rate(p0, gamma, n_bar, t);
        table.rows.push_back({t, n, "sz_rot", p.sz(), std::nullopt, "rate"});
      }
    }
    return table;
  }

  std::vector<DriveSetting> drives;
  for (const auto& t : cfg.targets)
    drives.push_back(calibrate_drive(t, cfg.drive_omega_bar_mhz, cfg.circuit.f_l_ghz));
  const LinearOperator h1 = build_h1(cfg.circuit, drives);
  const std::vector<CollapseChannel> channels =
      collapse_channels(cfg.circuit, cfg.targets, cfg.dissipation);
  const std::vector<Observable> observables = detail::build_observables(cfg);

  if (cfg.solver == SolverKind::Master) {
    const QuantumState rho0 =
        QuantumState::mixed(cfg.circuit.space(), detail::initial_density(cfg, n_bar));
    MasterDiagnostics md;
    const TimeSeries series = evolve_master(h1, channels, rho0, sim, observables, &md);
    if (diag) {
      diag->master = md;
      diag->has_master = true;
    }
    table.append_series(series, "master");
  } else {
    auto [sampler, support] = detail::initial_sampler(cfg, n_bar);
    TrajectoryDiagnostics td;
    const TimeSeries series =
        evolve_trajectories(h1, channels, sampler, support, sim, observables, &td);
    if (diag) {
      diag->traj = td;
      diag->has_traj = true;
    }
    table.append_series(series, "mc");
  }
  return table;
}

// ---------------------------------------------------------------------------
// Scenario presets reproducing the reference figures at desk scale.

inline ExperimentConfig scenario_n1_validation() {
  ExperimentConfig cfg;
  cfg.circuit.n_qubits = 1;
  cfg.circuit.f_c_ghz = 6.0;
  cfg.circuit.f_l_ghz = 5.7;
  cfg.circuit.v_mhz = 100.0;
  cfg.circuit.g_mhz = 2.0;
  cfg.circuit.kappa_mhz = 20.0;
  cfg.circuit.t_c_kelvin = 0.0;
  cfg.circuit.fock_levels = 3;
  cfg.circuit.temp_convention = TempConvention::Paper;
  cfg.drive_omega_bar_mhz = 100.0;
  cfg.targets = {{0.0, 0.0}};
  cfg.initial.qubits = InitialQubits::MixedRotated;
  cfg.initial.resonators = InitialResonators::Vacuum;
  cfg.solver = SolverKind::Master;
  const double t_pol = polarization_time(0.0, 0.0, cfg.circuit.g_ang(), cfg.circuit.kappa_ang());
  cfg.sim.t_final_us = 3.0 * t_pol;
  cfg.sample_count = 61;
  cfg.output.basename = "n1_validation";
  return cfg;
}

inline ExperimentConfig scenario_fig3(char variant) {
  ExperimentConfig cfg;
  cfg.circuit.n_qubits = 3;
  cfg.circuit.f_c_ghz = 6.0;
  cfg.circuit.f_l_ghz = 5.7;
  cfg.circuit.v_mhz = 100.0;
  cfg.circuit.temp_convention = TempConvention::Paper;
  cfg.circuit.t_c_kelvin = 0.0;
  cfg.circuit.fock_levels = 2;
  cfg.drive_omega_bar_mhz = 100.0;
  // Targets <sigma_x^1>, <sigma_y^2>, <sigma_z^3> -> -1.
  cfg.targets = {{0.5 * pi, pi}, {0.5 * pi, 0.5 * pi}, {0.0, 0.0}};
  // Initial condition <sigma_y^1> = <sigma_z^2> = <sigma_x^3> = +1.
  cfg.initial.qubits = InitialQubits::Bloch;
  cfg.initial.bloch = {{0.5 * pi, 1.5 * pi}, {pi, 0.0}, {0.5 * pi, 0.0}};
  cfg.initial.resonators = InitialResonators::Vacuum;
  cfg.solver = SolverKind::Trajectories;
  cfg.sim.n_traj = 200;
  cfg.sim.seed = 42;
  cfg.sim.rel_tol = 1e-6;
  cfg.sim.abs_tol = 1e-9;
  cfg.sample_count = 65;
  switch (variant) {
    case 'a':
      cfg.circuit.g_mhz = 2.0;
      cfg.circuit.kappa_mhz = 20.0;
      cfg.sim.t_final_us = 3.2;
      cfg.output.basename = "fig3a";
      break;
    case 'b':
      cfg.circuit.g_mhz = 15.0;
      cfg.circuit.kappa_mhz = 10.0;
      cfg.sim.t_final_us = 0.32;
      cfg.output.basename = "fig3b";
      break;
    case 'c':
      cfg.circuit.g_mhz = 15.0;
      cfg.circuit.kappa_mhz = 10.0;
      cfg.sim.t_final_us = 0.32;
      cfg.dissipation.enabled = true;
      cfg.dissipation.t_theta_us = 20.0;
      cfg.dissipation.t_phi_us = 10.0;
      cfg.dissipation.basis = DissipationBasis::Rotated;
      cfg.output.basename = "fig3c";
      break;
    default:
      throw ConfigError("scenario_fig3: variant must be a, b or c");
  }
  return cfg;
}

inline ExperimentConfig scenario_config(const std::string& name) {
  if (name == "fig3a") return scenario_fig3('a');
  if (name == "fig3b") return scenario_fig3('b');
  if (name == "fig3c") return scenario_fig3('c');
  if (name == "fig2" || name == "fig2_inset") {
    ExperimentConfig cfg = scenario_n1_validation();
    cfg.solver = SolverKind::Rate;
    cfg.output.basename = name;
    return cfg;
  }
  if (name == "n1_validation") return scenario_n1_validation();
  throw ConfigError("unknown scenario '" + name +
                    "' (valid: fig2, fig2_inset, fig3a, fig3b, fig3c, n1_validation)");
}

/// Named scenario runs. fig2 sweeps the bath temperature ladder of the
/// polarization curves; fig2_inset samples the rate surface Gamma(Delta/kappa,
/// theta); fig3a-c are the N = 3 Monte Carlo reset runs.
inline ResultTable run_scenario(const std::string& name,
                                const std::vector<std::string>& overrides = {},
                                RunDiagnostics* diag = nullptr) {
  ExperimentConfig cfg = scenario_config(name);
  for (const auto& ov : overrides) apply_override(cfg, ov);
  cfg.validate();

  if (name == "fig2") {
    // Rate-model polarization curves for the temperature ladder, on a grid
    // spanning Gamma t in [0, 16].
    const double gamma0 = polarization_rate(cfg.targets[0].theta, 0.0, cfg.circuit.g_ang(),
                                            cfg.circuit.kappa_ang());
    ResultTable table;
    for (double t_c : {0.0, 0.3, 0.4, 0.5}) {
      ExperimentConfig c = cfg;
      c.circuit.t_c_kelvin = t_c;
      c.sim.t_final_us = 16.0 / gamma0;
      c.sample_count = 81;
      c.sim.sample_times.clear();
      char suffix[48];
      std::snprintf(suffix, sizeof suffix, "@t_c_kelvin=%g", t_c);
      table.append_with_suffix(run_experiment(c, diag), suffix);
    }
    return table;
  }
  if (name == "fig2_inset") {
    ResultTable table;
    table.x_label = "Delta_over_kappa";
    const double g = cfg.circuit.g_ang();
    const double kappa = cfg.circuit.kappa_ang();
    for (double theta : {0.0, 0.25 * pi, 0.5 * pi, 0.75 * pi, pi}) {
      char label[48];
      std::snprintf(label, sizeof label, "Gamma_per_us@theta=%g", theta);
      for (int i = 0; i <= 40; ++i) {
        const double dk = 2.0 * i / 40.0;  // Delta/kappa
        const double gamma = polarization_rate(theta, dk * kappa, g, kappa);
        table.rows.push_back({dk, 0, label, gamma, std::nullopt, "rate"});
      }
    }
    return table;
  }
  return run_experiment(cfg, diag);
}

/// One run per axis value, appended in order with the swept value recorded
/// in the observable label; seeds are offset per point.
inline ResultTable run_sweep(const ExperimentConfig& base, const std::string& axis,
                             const std::vector<double>& values) {
  ResultTable table;
  for (size_t i = 0; i < values.size(); ++i) {
    ExperimentConfig cfg = base;
    apply_override(cfg, axis + "=" + detail::fmt_double(values[i]));
    cfg.sim.seed = base.sim.seed + i;
    cfg.validate();
    char suffix[64];
    std::snprintf(suffix, sizeof suffix, "@%s=%g", axis.c_str(), values[i]);
    const ResultTable one = run_experiment(cfg);
    for (ResultRow row : one.rows) {
      row.observable += suffix;
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

}  // namespace qreset

#endif  // QRESET_SCENARIO_HPP

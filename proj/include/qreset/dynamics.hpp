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

#ifndef QRESET_DYNAMICS_HPP
#define QRESET_DYNAMICS_HPP

#include <atomic>
#include <cstdlib>
#include <functional>
#include <limits>
#include <mutex>
#include <queue>
#include <random>
#include <thread>
#include <vector>

#include "qreset/circuit.hpp"
#include "qreset/integrator.hpp"
#include "qreset/operators.hpp"

namespace qreset {

/// One Lindblad jump channel. With the dissipator convention
/// D[O]rho = 2 O rho O^+ - {O^+O, rho}, a stored rate gamma contributes
/// (gamma/2) D[op], i.e. the standard-form jump operator sqrt(gamma) op.
struct CollapseChannel {
  LinearOperator op;
  double rate = 0.0;  // 1/us, angular convention
  std::string label;
};

enum class DissipationBasis { Rotated, Lab };

struct DissipationParams {
  bool enabled = false;
  double t_theta_us = 20.0;  // qubit decay time
  double t_phi_us = 10.0;    // qubit dephasing time
  DissipationBasis basis = DissipationBasis::Rotated;

  void validate() const {
    if (!enabled) return;
    if (t_theta_us <= 0) throw ConfigError("dissipation.t_theta_us: must be positive");
    if (t_phi_us <= 0) throw ConfigError("dissipation.t_phi_us: must be positive");
  }
};

struct SimOptions {
  double t_final_us = 1.0;
  double dt_max_us = 0.0;  // 0 = uncapped (error control only)
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  int n_traj = 200;
  std::uint64_t seed = 1;
  std::vector<double> sample_times;  // strictly increasing, within [0, t_final]

  void validate() const {
    if (t_final_us <= 0) throw ConfigError("sim.t_final_us: must be positive");
    if (rel_tol <= 0 || abs_tol <= 0) throw ConfigError("sim tolerances must be positive");
    if (n_traj < 1) throw ConfigError("sim.n_traj: must be >= 1");
    for (size_t i = 0; i < sample_times.size(); ++i) {
      if (sample_times[i] < 0 || sample_times[i] > t_final_us + 1e-12)
        throw ConfigError("sim.sample_times: outside [0, t_final]");
      if (i > 0 && sample_times[i] <= sample_times[i - 1])
        throw ConfigError("sim.sample_times: not strictly increasing");
    }
  }

  std::vector<double> samples_or_default(int count = 51) const {
    if (!sample_times.empty()) return sample_times;
    std::vector<double> t(count);
    for (int i = 0; i < count; ++i) t[i] = t_final_us * i / double(count - 1);
    return t;
  }
};

struct TimeSeriesRow {
  double t_us = 0.0;
  std::string label;
  int qubit = 0;  // 0 when not qubit-specific
  double value = 0.0;
  double stderr_ = 0.0;
  bool has_stderr = false;
};

struct TimeSeries {
  std::vector<TimeSeriesRow> rows;

  std::vector<TimeSeriesRow> select(const std::string& label, int qubit = -1) const {
    std::vector<TimeSeriesRow> out;
    for (const auto& r : rows)
      if (r.label == label && (qubit < 0 || r.qubit == qubit)) out.push_back(r);
    return out;
  }
};

struct Observable {
  std::string label;
  int qubit = 0;
  LinearOperator op;
};

/// Equilibrium photon number of a resonator at bath temperature t_c.
/// The paper convention carries an extra 2 pi in the Boltzmann exponent
/// relative to the physical h f / k_B T; both are exposed.
inline double thermal_occupancy(double f_c_ghz, double t_c_kelvin, TempConvention conv) {
  if (t_c_kelvin < 0) throw NumericalError("thermal_occupancy: negative temperature");
  if (t_c_kelvin == 0.0) return 0.0;
  double x = planck_h_J_s * (f_c_ghz * 1e9) / (boltzmann_J_per_K * t_c_kelvin);
  if (conv == TempConvention::Paper) x *= two_pi;
  if (x > 700.0) return 0.0;
  return 1.0 / std::expm1(x);
}

/// Jump channels of the network: resonator loss kappa(1+n) and heating
/// kappa n per mode, plus optional qubit decay 2/T_theta and dephasing
/// 1/T_phi along the rotated (default) or lab-frame qubit operators.
inline std::vector<CollapseChannel> collapse_channels(const CircuitParams& params,
                                                      const std::vector<QubitTarget>& targets,
                                                      const DissipationParams& diss) {
  params.validate();
  diss.validate();
  if (static_cast<int>(targets.size()) != params.n_qubits)
    throw DimensionError("collapse_channels: targets length must equal qubit count");

  const HilbertSpec spec = params.space();
  const double kappa = params.kappa_ang();
  const double n_bar = thermal_occupancy(params.f_c_ghz, params.t_c_kelvin,
                                         params.temp_convention);
  const LinearOperator a = destroy(params.fock_levels);

  std::vector<CollapseChannel> ch;
  for (int m = 1; m <= params.n_resonators(); ++m)
    ch.push_back({embed(a, spec.resonator_slot(m), spec), kappa * (1.0 + n_bar),
                  "loss:r" + std::to_string(m)});
  if (n_bar > 0.0) {
    const LinearOperator ad = a.adjoint();
    for (int m = 1; m <= params.n_resonators(); ++m)
      ch.push_back({embed(ad, spec.resonator_slot(m), spec), kappa * n_bar,
                    "heat:r" + std::to_string(m)});
  }
  if (diss.enabled) {
    for (int n = 1; n <= params.n_qubits; ++n) {
      const int qs = spec.qubit_slot(n);
      LinearOperator sm = pauli(PauliAxis::Minus);
      LinearOperator sz = pauli(PauliAxis::Z);
      if (diss.basis == DissipationBasis::Rotated) {
        const RotatedPaulis rp = rotated_pauli(targets[n - 1]);
        sm = rp.minus();
        sz = rp.z;
      }
      ch.push_back({embed(sm, qs, spec), 2.0 / diss.t_theta_us, "decay:q" + std::to_string(n)});
      ch.push_back({embed(sz, qs, spec), 1.0 / diss.t_phi_us, "dephase:q" + std::to_string(n)});
    }
  }
  return ch;
}

/// -i[H, rho] + sum_k gamma_k/2 (2 c rho c^+ - c^+c rho - rho c^+c).
inline MatCxd lindblad_rhs(const LinearOperator& h, const std::vector<CollapseChannel>& channels,
                           const QuantumState& state) {
  if (state.spec != h.spec) throw DimensionError("lindblad_rhs: spec mismatch");
  const MatCxd rho = state.density();
  MatCxd out = -iu * (h.mat * rho - rho * h.mat);
  for (const auto& ch : channels) {
    if (ch.op.spec != h.spec) throw DimensionError("lindblad_rhs: channel spec mismatch");
    const MatCxd crho = ch.op.mat * rho;
    const MatCxd cdc = MatCxd(SparseCxd(ch.op.adjoint().mat * ch.op.mat));
    out += (0.5 * ch.rate) * (2.0 * (crho * ch.op.adjoint().mat) - cdc * rho - rho * cdc);
  }
  return out;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Per-trajectory generator: a pure function of (master seed, index), so the
/// ensemble is independent of execution order and worker count.
inline std::mt19937_64 trajectory_rng(std::uint64_t master_seed, int index) {
  return std::mt19937_64(splitmix64(master_seed + splitmix64(std::uint64_t(index))));
}

inline double uniform01(std::mt19937_64& rng) {
  return double(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_positive(std::mt19937_64& rng) {
  for (;;) {
    const double u = uniform01(rng);
    if (u > 0.0) return u;
  }
}

inline int resolve_thread_count() {
  if (const char* env = std::getenv("QRESET_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc ? static_cast<int>(hc) : 1;
}

inline void run_indexed(int n_items, int n_threads, const std::function<void(int)>& fn) {
  if (n_threads <= 1 || n_items <= 1) {
    for (int i = 0; i < n_items; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n_items || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int nt = std::min(n_threads, n_items);
  pool.reserve(nt);
  for (int k = 0; k < nt; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

/// Indices reachable from `seeds` along the sparsity patterns (an entry
/// M(i,k) is the directed edge k -> i). The evolution generated by operators
/// with these patterns keeps states supported inside the closure, so the
/// integration can be restricted to it exactly.
inline std::vector<int> reachable_subspace(int dim, const std::vector<const SparseCxd*>& pats,
                                           const std::vector<int>& seeds) {
  std::vector<char> seen(dim, 0);
  std::queue<int> frontier;
  for (int s : seeds) {
    if (s < 0 || s >= dim) throw DimensionError("reachable_subspace: seed out of range");
    if (!seen[s]) {
      seen[s] = 1;
      frontier.push(s);
    }
  }
  while (!frontier.empty()) {
    const int k = frontier.front();
    frontier.pop();
    for (const SparseCxd* m : pats) {
      for (SparseCxd::InnerIterator it(*m, k); it; ++it) {
        const int i = static_cast<int>(it.row());
        if (!seen[i]) {
          seen[i] = 1;
          frontier.push(i);
        }
      }
    }
  }
  std::vector<int> out;
  for (int i = 0; i < dim; ++i)
    if (seen[i]) out.push_back(i);
  return out;
}

inline SparseCxd restrict_sparse(const SparseCxd& m, const std::vector<int>& keep,
                                 const std::vector<int>& inverse) {
  std::vector<Eigen::Triplet<cxd>> t;
  for (int j : keep) {
    for (SparseCxd::InnerIterator it(m, j); it; ++it) {
      const int i = inverse[it.row()];
      if (i >= 0) t.emplace_back(i, inverse[it.col()], it.value());
    }
  }
  SparseCxd out(static_cast<int>(keep.size()), static_cast<int>(keep.size()));
  out.setFromTriplets(t.begin(), t.end());
  out.makeCompressed();
  return out;
}

struct Restriction {
  std::vector<int> keep;
  std::vector<int> inverse;

  int dim() const { return static_cast<int>(keep.size()); }
  SparseCxd op(const SparseCxd& m) const { return restrict_sparse(m, keep, inverse); }
  VecCxd vec(const VecCxd& v) const {
    VecCxd out(dim());
    for (int i = 0; i < dim(); ++i) out(i) = v(keep[i]);
    return out;
  }
  MatCxd mat(const MatCxd& m) const {
    MatCxd out(dim(), dim());
    for (int j = 0; j < dim(); ++j)
      for (int i = 0; i < dim(); ++i) out(i, j) = m(keep[i], keep[j]);
    return out;
  }
};

inline Restriction make_restriction(const LinearOperator& h,
                                    const std::vector<CollapseChannel>& channels,
                                    const std::vector<int>& seeds) {
  std::vector<SparseCxd> cdc;
  std::vector<const SparseCxd*> pats{&h.mat};
  cdc.reserve(channels.size());
  for (const auto& ch : channels) {
    cdc.emplace_back(SparseCxd(ch.op.adjoint().mat * ch.op.mat));
    pats.push_back(&ch.op.mat);
  }
  for (const auto& m : cdc) pats.push_back(&m);
  Restriction r;
  r.keep = reachable_subspace(h.dim(), pats, seeds);
  r.inverse.assign(h.dim(), -1);
  for (int i = 0; i < r.dim(); ++i) r.inverse[r.keep[i]] = i;
  return r;
}

inline std::vector<int> support_indices(const VecCxd& v, double tol = 0.0) {
  std::vector<int> s;
  for (int i = 0; i < v.size(); ++i)
    if (std::abs(v(i)) > tol) s.push_back(i);
  return s;
}

inline std::vector<int> support_indices(const MatCxd& m, double tol = 0.0) {
  std::vector<char> mark(m.rows(), 0);
  for (int j = 0; j < m.cols(); ++j)
    for (int i = 0; i < m.rows(); ++i)
      if (std::abs(m(i, j)) > tol) mark[i] = mark[j] = 1;
  std::vector<int> s;
  for (int i = 0; i < m.rows(); ++i)
    if (mark[i]) s.push_back(i);
  return s;
}

/// Non-Hermitian drift A = -i(H - e0) - 1/2 sum_k gamma_k c_k^+ c_k and the
/// scaled jump operators sqrt(gamma_k) c_k, restricted to the active span.
struct CompiledGenerator {
  SparseCxd drift;
  std::vector<SparseCxd> jump;       // sqrt(gamma) c, restricted
  std::vector<SparseCxd> jump_adj;   // adjoints
  Restriction sub;
  double energy_shift = 0.0;

  int dim() const { return sub.dim(); }
};

inline CompiledGenerator compile_generator(const LinearOperator& h,
                                           const std::vector<CollapseChannel>& channels,
                                           const std::vector<int>& seeds, bool center_energy) {
  for (const auto& ch : channels) {
    if (ch.op.spec != h.spec) throw DimensionError("dynamics: channel spec mismatch");
    if (ch.rate < 0) throw NumericalError("dynamics: negative channel rate");
  }
  CompiledGenerator g;
  g.sub = make_restriction(h, channels, seeds);

  SparseCxd hs = g.sub.op(h.mat);
  if (center_energy && hs.rows() > 0) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < hs.rows(); ++i) {
      const double d = hs.coeff(i, i).real();
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    g.energy_shift = 0.5 * (lo + hi);
  }

  SparseCxd drift = -iu * hs;
  if (g.energy_shift != 0.0) {
    SparseCxd id(hs.rows(), hs.cols());
    id.setIdentity();
    drift = drift + (iu * g.energy_shift) * id;
  }
  for (const auto& ch : channels) {
    SparseCxd c = g.sub.op(ch.op.mat);
    c = std::sqrt(ch.rate) * c;
    SparseCxd cd = c.adjoint();
    drift = drift - 0.5 * SparseCxd(cd * c);
    g.jump.push_back(std::move(c));
    g.jump_adj.push_back(std::move(cd));
  }
  drift.makeCompressed();
  g.drift = std::move(drift);
  return g;
}

inline cxd restricted_expect(const SparseCxd& op, const MatCxd& rho) {
  cxd acc = 0.0;
  for (int k = 0; k < op.outerSize(); ++k)
    for (SparseCxd::InnerIterator it(op, k); it; ++it)
      acc += it.value() * rho(it.col(), it.row());
  return acc;
}

inline cxd restricted_expect(const SparseCxd& op, const VecCxd& psi) {
  return psi.dot(op * psi);
}

constexpr double time_eps = 1e-12;

}  // namespace detail

struct MasterDiagnostics {
  double max_trace_error = 0.0;
  double max_hermiticity_error = 0.0;
  double min_eigenvalue = std::numeric_limits<double>::infinity();
  int active_dim = 0;
};

/// Deterministic density-matrix integration of the master equation. The
/// generator is restricted, exactly, to the subspace reachable from the
/// initial support before integrating; observables are recorded on the
/// sample grid and state invariants are checked there.
inline TimeSeries evolve_master(const LinearOperator& h,
                                const std::vector<CollapseChannel>& channels,
                                const QuantumState& rho0, const SimOptions& opts,
                                const std::vector<Observable>& observables,
                                MasterDiagnostics* diag = nullptr) {
  opts.validate();
  if (rho0.spec != h.spec) throw DimensionError("evolve_master: state spec mismatch");
  if (h.dim() > 4096)
    throw DimensionError(
        "evolve_master: dimension above density-matrix limit (4096); use evolve_trajectories");
  for (const auto& o : observables)
    if (o.op.spec != h.spec) throw DimensionError("evolve_master: observable spec mismatch");

  MatCxd pure_promoted;
  if (rho0.is_pure()) pure_promoted = rho0.density();
  const MatCxd& rho_full = rho0.is_pure() ? pure_promoted : rho0.rho;
  auto gen = detail::compile_generator(h, channels, detail::support_indices(rho_full),
                                       /*center_energy=*/false);
  const int n = gen.dim();

  std::vector<SparseCxd> obs;
  obs.reserve(observables.size());
  for (const auto& o : observables) obs.push_back(gen.sub.op(o.op.mat));

  MatCxd rho = gen.sub.mat(rho_full);

  struct Rhs {
    const CompiledGenerator& g;
    MatCxd w, t1, t2;
    explicit Rhs(const CompiledGenerator& gg, int n)
        : g(gg), w(n, n), t1(n, n), t2(n, n) {}
    void operator()(double, const MatCxd& y, MatCxd& dy) {
      w.noalias() = g.drift * y;
      dy = w;
      dy += w.adjoint();
      for (size_t k = 0; k < g.jump.size(); ++k) {
        t1.noalias() = g.jump[k] * y;
        t2.noalias() = t1 * g.jump_adj[k];
        dy += t2;
      }
    }
  } rhs(gen, n);

  StepperOptions sopts;
  sopts.rel_tol = opts.rel_tol;
  sopts.abs_tol = opts.abs_tol;
  if (opts.dt_max_us > 0) sopts.dt_max = opts.dt_max_us;
  sopts.dt_init = std::min(sopts.dt_max, 1e-5);
  Dopri5<MatCxd> stepper(sopts);

  double t = 0.0;
  stepper.reset(rhs, t, rho);

  MasterDiagnostics local;
  local.active_dim = n;
  TimeSeries series;
  const std::vector<double> samples = opts.samples_or_default();

  auto record = [&](double ts) {
    for (size_t k = 0; k < obs.size(); ++k) {
      const cxd v = detail::restricted_expect(obs[k], rho);
      series.rows.push_back({ts, observables[k].label, observables[k].qubit, v.real(), 0.0, false});
    }
    local.max_trace_error =
        std::max(local.max_trace_error, std::abs(rho.trace() - cxd(1.0, 0.0)));
    local.max_hermiticity_error =
        std::max(local.max_hermiticity_error, (rho - rho.adjoint()).cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<MatCxd> es(0.5 * (rho + rho.adjoint()),
                                             Eigen::EigenvaluesOnly);
    local.min_eigenvalue = std::min(local.min_eigenvalue, es.eigenvalues().minCoeff());
  };

  for (double ts : samples) {
    while (t < ts - detail::time_eps) stepper.step(rhs, t, rho, ts);
    t = ts;
    record(ts);
  }
  if (diag) *diag = local;
  return series;
}

struct TrajectoryDiagnostics {
  double max_norm_deviation = 0.0;  // only meaningful for channel-free runs
  int active_dim = 0;
  long total_jumps = 0;
};

using InitialSampler = std::function<VecCxd(std::mt19937_64&)>;

/// Monte Carlo quantum-jump unraveling. Trajectories are integrated with the
/// non-Hermitian drift H - (i/2) sum gamma c^+c; a jump fires when the
/// squared norm crosses a uniform draw, located by bisection inside the
/// accepted step; the channel is chosen proportional to gamma ||c psi||^2.
/// Each trajectory's RNG is derived from (seed, trajectory index) alone, and
/// results are reduced in index order: means are bit-identical for any
/// worker count (QRESET_THREADS caps parallelism).
inline TimeSeries evolve_trajectories(const LinearOperator& h,
                                      const std::vector<CollapseChannel>& channels,
                                      const InitialSampler& sampler,
                                      const std::vector<int>& initial_support,
                                      const SimOptions& opts,
                                      const std::vector<Observable>& observables,
                                      TrajectoryDiagnostics* diag = nullptr) {
  opts.validate();
  for (const auto& o : observables)
    if (o.op.spec != h.spec) throw DimensionError("evolve_trajectories: observable spec mismatch");

  auto gen = detail::compile_generator(h, channels, initial_support, /*center_energy=*/true);
  const int n = gen.dim();
  const bool has_channels = !channels.empty();

  std::vector<SparseCxd> obs;
  obs.reserve(observables.size());
  for (const auto& o : observables) obs.push_back(gen.sub.op(o.op.mat));

  const std::vector<double> samples = opts.samples_or_default();
  const int n_samples = static_cast<int>(samples.size());
  const int n_obs = static_cast<int>(obs.size());
  const int n_traj = opts.n_traj;

  // Per-trajectory results, reduced in index order after the parallel phase.
  std::vector<double> values(static_cast<size_t>(n_traj) * n_samples * n_obs, 0.0);
  std::vector<double> norm_dev(n_traj, 0.0);
  std::vector<long> jumps(n_traj, 0);

  auto run_one = [&](int traj) {
    std::mt19937_64 rng = detail::trajectory_rng(opts.seed, traj);

    VecCxd psi_full = sampler(rng);
    if (psi_full.size() != h.dim())
      throw DimensionError("evolve_trajectories: initial state size mismatch");
    VecCxd psi = gen.sub.vec(psi_full);
    {
      const double nrm = psi.norm();
      if (!(nrm > 0) || std::abs(nrm - 1.0) > 1e-9)
        throw NumericalError("evolve_trajectories: initial state not normalized");
      psi /= nrm;
    }

    struct Rhs {
      const SparseCxd& a;
      void operator()(double, const VecCxd& y, VecCxd& dy) { dy.noalias() = a * y; }
    } rhs{gen.drift};

    StepperOptions sopts;
    sopts.rel_tol = opts.rel_tol;
    sopts.abs_tol = opts.abs_tol;
    if (opts.dt_max_us > 0) sopts.dt_max = opts.dt_max_us;
    sopts.dt_init = std::min(sopts.dt_max, 1e-5);
    Dopri5<VecCxd> stepper(sopts);

    double t = 0.0;
    double threshold = has_channels ? detail::uniform_positive(rng) : 0.0;
    stepper.reset(rhs, t, psi);

    VecCxd probe_buf(n), cpsi(n);

    auto handle_jump_if_crossed = [&](double t_start) -> bool {
      if (!has_channels || psi.squaredNorm() >= threshold) return false;
      const VecCxd& base = stepper.previous();
      double lo = 0.0, hi = t - t_start;
      for (int it = 0; it < 200 && hi - lo > 1e-16 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        stepper.probe(rhs, t_start, base, mid, probe_buf);
        const double nn = probe_buf.squaredNorm();
        if (nn < threshold)
          hi = mid;
        else
          lo = mid;
        if (std::abs(nn - threshold) < 1e-10) break;
      }
      const double s = 0.5 * (lo + hi);
      stepper.probe(rhs, t_start, base, s, probe_buf);
      psi = probe_buf;
      t = t_start + s;

      double total = 0.0;
      std::vector<double> w(gen.jump.size(), 0.0);
      for (size_t k = 0; k < gen.jump.size(); ++k) {
        cpsi.noalias() = gen.jump[k] * psi;
        w[k] = cpsi.squaredNorm();
        total += w[k];
      }
      if (!(total > 0))
        throw NumericalError("evolve_trajectories: zero-norm state at jump");
      double u = detail::uniform01(rng) * total;
      size_t pick = gen.jump.size() - 1;
      for (size_t k = 0; k < gen.jump.size(); ++k) {
        if (u < w[k]) {
          pick = k;
          break;
        }
        u -= w[k];
      }
      cpsi.noalias() = gen.jump[pick] * psi;
      psi = cpsi / std::sqrt(w[pick]);
      threshold = detail::uniform_positive(rng);
      stepper.rearm(rhs, t, psi);
      ++jumps[traj];
      return true;
    };

    int si = 0;
    auto record = [&](double /*ts*/) {
      const double nn = psi.squaredNorm();
      if (!(nn > 1e-280))
        throw NumericalError("evolve_trajectories: state norm underflow");
      if (!has_channels)
        norm_dev[traj] = std::max(norm_dev[traj], std::abs(std::sqrt(nn) - 1.0));
      for (int k = 0; k < n_obs; ++k) {
        const cxd v = detail::restricted_expect(obs[k], psi);
        values[(static_cast<size_t>(traj) * n_samples + si) * n_obs + k] = v.real() / nn;
      }
    };

    for (; si < n_samples; ++si) {
      const double ts = samples[si];
      while (t < ts - detail::time_eps) {
        const double t_start = t;
        stepper.step(rhs, t, psi, ts);
        handle_jump_if_crossed(t_start);
      }
      t = ts;
      record(ts);
    }
  };

  detail::run_indexed(n_traj, detail::resolve_thread_count(), run_one);

  TimeSeries series;
  TrajectoryDiagnostics local;
  local.active_dim = n;
  for (int traj = 0; traj < n_traj; ++traj) {
    local.max_norm_deviation = std::max(local.max_norm_deviation, norm_dev[traj]);
    local.total_jumps += jumps[traj];
  }
  for (int s = 0; s < n_samples; ++s) {
    for (int k = 0; k < n_obs; ++k) {
      double mean = 0.0;
      for (int traj = 0; traj < n_traj; ++traj)
        mean += values[(static_cast<size_t>(traj) * n_samples + s) * n_obs + k];
      mean /= n_traj;
      double var = 0.0;
      for (int traj = 0; traj < n_traj; ++traj) {
        const double d =
            values[(static_cast<size_t>(traj) * n_samples + s) * n_obs + k] - mean;
        var += d * d;
      }
      const double se = (n_traj > 1) ? std::sqrt(var / (double(n_traj) * (n_traj - 1))) : 0.0;
      series.rows.push_back({samples[s], observables[k].label, observables[k].qubit, mean, se, true});
    }
  }
  if (diag) *diag = local;
  return series;
}

/// Fixed pure initial state variant.
inline TimeSeries evolve_trajectories(const LinearOperator& h,
                                      const std::vector<CollapseChannel>& channels,
                                      const QuantumState& psi0, const SimOptions& opts,
                                      const std::vector<Observable>& observables,
                                      TrajectoryDiagnostics* diag = nullptr) {
  if (!psi0.is_pure())
    throw DimensionError("evolve_trajectories: initial state must be pure");
  if (psi0.spec != h.spec) throw DimensionError("evolve_trajectories: state spec mismatch");
  const VecCxd psi = psi0.psi;
  return evolve_trajectories(
      h, channels, [psi](std::mt19937_64&) { return psi; },
      detail::support_indices(psi), opts, observables, diag);
}

/// Bloch components of qubit n in its rotated target frame.
inline std::array<double, 3> reduced_qubit_bloch(const QuantumState& state, int qubit_n,
                                                 const QubitTarget& target) {
  const HilbertSpec& spec = state.spec;
  const int slot = spec.qubit_slot(qubit_n);  // throws for bad index
  MatCxd r2 = MatCxd::Zero(2, 2);
  if (state.is_pure()) {
    const int suf = spec.suffix_dim(slot);
    const int pre = spec.prefix_dim(slot);
    for (int p = 0; p < pre; ++p)
      for (int s = 0; s < suf; ++s) {
        const int i0 = (p * 2 + 0) * suf + s;
        const int i1 = (p * 2 + 1) * suf + s;
        r2(0, 0) += state.psi(i0) * std::conj(state.psi(i0));
        r2(0, 1) += state.psi(i0) * std::conj(state.psi(i1));
        r2(1, 0) += state.psi(i1) * std::conj(state.psi(i0));
        r2(1, 1) += state.psi(i1) * std::conj(state.psi(i1));
      }
  } else {
    r2 = partial_trace(state, {slot}).rho;
  }
  const double tr = r2.trace().real();
  if (tr > 0) r2 /= tr;
  const RotatedPaulis rp = rotated_pauli(target);
  auto ev = [&](const LinearOperator& op) {
    return (op.dense() * r2).trace().real();
  };
  return {ev(rp.x), ev(rp.y), ev(rp.z)};
}

}  // namespace qreset

#endif  // QRESET_DYNAMICS_HPP

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

#ifndef QRESET_RATES_HPP
#define QRESET_RATES_HPP

#include <cmath>
#include <limits>
#include <utility>

#include "qreset/circuit.hpp"
#include "qreset/dynamics.hpp"

namespace qreset {

// The analytic layer works in angular units throughout: couplings and
// detunings in rad/us in, rates in 1/us out.

struct EtaLambda {
  double eta = 0.0;     // us
  double lambda = 0.0;  // us
};

/// Kernel integrals eta = 2 kappa / (kappa^2 + 4 Delta^2),
/// lambda = 4 Delta / (kappa^2 + 4 Delta^2).
inline EtaLambda eta_lambda(double kappa, double delta) {
  if (kappa <= 0) throw NumericalError("eta_lambda: kappa must be positive");
  const double den = kappa * kappa + 4.0 * delta * delta;
  return {2.0 * kappa / den, 4.0 * delta / den};
}

/// Per-qubit polarization rate (1/us):
///   Gamma = (1 + cos theta)^2 / (1 + 4 (Delta/kappa)^2) * g^2 / kappa.
inline double polarization_rate(double theta, double delta, double g, double kappa) {
  if (kappa <= 0) throw NumericalError("polarization_rate: kappa must be positive");
  const double c = 1.0 + std::cos(theta);
  const double lorentz = 1.0 + 4.0 * (delta / kappa) * (delta / kappa);
  return c * c / lorentz * g * g / kappa;
}

/// Inverse of polarization_rate; saturates to +inf at theta = pi.
inline double polarization_time(double theta, double delta, double g, double kappa) {
  const double c = 1.0 + std::cos(theta);
  if (c * c == 0.0) return std::numeric_limits<double>::infinity();
  const double lorentz = 1.0 + 4.0 * (delta / kappa) * (delta / kappa);
  return lorentz / (c * c) * kappa / (g * g);
}

struct RateParams {
  double gamma_n = 0.0;  // 1/us
  double n_bar = 0.0;
  double eta = 0.0;    // us
  double lambda = 0.0; // us
  int branch = -1;     // l
};

inline RateParams make_rate_params(double theta, double delta, double g, double kappa,
                                   double n_bar, int branch = -1) {
  const EtaLambda el = eta_lambda(kappa, delta);
  return {polarization_rate(theta, delta, g, kappa), n_bar, el.eta, el.lambda, branch};
}

/// Two-level populations of the rotated-basis eigenstates, ordered
/// (P_{-1}, P_{+1}).
struct PopulationVector {
  double p_minus = 1.0;
  double p_plus = 0.0;

  double sz() const { return p_plus - p_minus; }

  void validate(double tol = 1e-12) const {
    if (p_minus < -tol || p_minus > 1 + tol || p_plus < -tol || p_plus > 1 + tol ||
        std::abs(p_minus + p_plus - 1.0) > tol)
      throw NumericalError("PopulationVector: not a normalized distribution");
  }
};

/// M = [[-n, n+1], [n, -(n+1)]] acting on (P_{-1}, P_{+1}).
inline Eigen::Matrix2d rate_matrix(double n_bar) {
  if (n_bar < 0) throw NumericalError("rate_matrix: negative occupancy");
  Eigen::Matrix2d m;
  m << -n_bar, n_bar + 1.0, n_bar, -(n_bar + 1.0);
  return m;
}

/// Closed-form solution of dP/dt = Gamma M P: relaxation to the stationary
/// vector (n+1, n)/(2n+1) at total rate Gamma (2 n_bar + 1).
inline PopulationVector evolve_rate(const PopulationVector& p0, double gamma, double n_bar,
                                    double t) {
  if (t < 0) throw NumericalError("evolve_rate: negative time");
  if (n_bar < 0) throw NumericalError("evolve_rate: negative occupancy");
  const double z = 2.0 * n_bar + 1.0;
  const double pm_inf = (n_bar + 1.0) / z;
  const double decay = std::exp(-gamma * z * t);
  PopulationVector p;
  p.p_minus = pm_inf + (p0.p_minus - pm_inf) * decay;
  p.p_plus = 1.0 - p.p_minus;
  return p;
}

/// Equilibrium <sigma_z^(z)>: (e^{-x} - 1)/(e^{-x} + 1) with x set by the
/// thermal occupancy convention; equals -1/(2 n_bar + 1).
inline double steady_state_sz(double f_c_ghz, double t_c_kelvin, TempConvention conv) {
  if (t_c_kelvin < 0) throw NumericalError("steady_state_sz: negative temperature");
  if (t_c_kelvin == 0.0) return -1.0;
  double x = planck_h_J_s * (f_c_ghz * 1e9) / (boltzmann_J_per_K * t_c_kelvin);
  if (conv == TempConvention::Paper) x *= two_pi;
  if (x > 700.0) return -1.0;
  const double em = std::exp(-x);
  return (em - 1.0) / (em + 1.0);
}

struct ExpFitResult {
  double t_fit = 0.0;        // fitted time constant (us)
  double amplitude = 1.0;    // fitted A in A e^{-t/T} - 1
  double rms_residual = 0.0;
  bool poor_fit = false;
};

/// Least-squares fit of <sigma_z>(t) = A e^{-t/T} - 1 over the given rows.
/// Throws for fewer than 5 samples or a constant (no-decay) series; flags a
/// poor fit when the residual swamps the signal.
inline ExpFitResult fit_exponential(const std::vector<TimeSeriesRow>& rows) {
  if (rows.size() < 5) throw NumericalError("fit_exponential: need at least 5 samples");
  const int n = static_cast<int>(rows.size());
  std::vector<double> ts(n), z(n);
  double zmin = std::numeric_limits<double>::infinity(), zmax = -zmin;
  for (int i = 0; i < n; ++i) {
    ts[i] = rows[i].t_us;
    z[i] = rows[i].value + 1.0;  // model: z = A e^{-t/T}
    zmin = std::min(zmin, z[i]);
    zmax = std::max(zmax, z[i]);
  }
  const double signal = zmax - zmin;
  if (signal < 1e-12)
    throw NumericalError("fit_exponential: degenerate fit (constant series)");

  // Weighted log-linear regression for the starting point.
  double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
  const double floor = std::max(zmax * 1e-6, 1e-300);
  for (int i = 0; i < n; ++i) {
    if (z[i] <= floor) continue;
    const double w = z[i] * z[i];
    const double y = std::log(z[i]);
    sw += w;
    swx += w * ts[i];
    swy += w * y;
    swxx += w * ts[i] * ts[i];
    swxy += w * ts[i] * y;
  }
  double t_est = (ts.back() - ts.front());
  double a_est = 1.0;
  const double det = sw * swxx - swx * swx;
  if (std::abs(det) > 1e-300) {
    const double slope = (sw * swxy - swx * swy) / det;
    const double intercept = (swy - slope * swx) / sw;
    if (slope < -1e-300) t_est = -1.0 / slope;
    a_est = std::exp(intercept);
  }
  if (!(t_est > 0) || !std::isfinite(t_est)) t_est = ts.back() - ts.front();
  if (!(a_est > 0) || !std::isfinite(a_est)) a_est = 1.0;

  auto sse = [&](double a, double tc) {
    double s = 0;
    for (int i = 0; i < n; ++i) {
      const double r = a * std::exp(-ts[i] / tc) - z[i];
      s += r * r;
    }
    return s;
  };

  // Damped Gauss-Newton on (A, T).
  double a = a_est, tc = t_est;
  double cur = sse(a, tc);
  for (int iter = 0; iter < 100; ++iter) {
    double j11 = 0, j12 = 0, j22 = 0, g1 = 0, g2 = 0;
    for (int i = 0; i < n; ++i) {
      const double e = std::exp(-ts[i] / tc);
      const double r = a * e - z[i];
      const double da = e;
      const double dt = a * e * ts[i] / (tc * tc);
      j11 += da * da;
      j12 += da * dt;
      j22 += dt * dt;
      g1 += da * r;
      g2 += dt * r;
    }
    const double d = j11 * j22 - j12 * j12;
    if (std::abs(d) < 1e-300) break;
    double step_a = -(j22 * g1 - j12 * g2) / d;
    double step_t = -(-j12 * g1 + j11 * g2) / d;
    double lambda = 1.0;
    bool improved = false;
    for (int h = 0; h < 30; ++h) {
      const double na = a + lambda * step_a;
      const double nt = tc + lambda * step_t;
      if (nt > 0 && std::isfinite(na) && std::isfinite(nt)) {
        const double s = sse(na, nt);
        if (s <= cur) {
          const double rel = (cur - s) / std::max(cur, 1e-300);
          a = na;
          tc = nt;
          cur = s;
          improved = true;
          if (rel < 1e-14) iter = 100;
          break;
        }
      }
      lambda *= 0.5;
    }
    if (!improved) break;
  }

  ExpFitResult out;
  out.t_fit = tc;
  out.amplitude = a;
  out.rms_residual = std::sqrt(cur / n);
  out.poor_fit = out.rms_residual > 0.1 * signal;
  return out;
}

inline ExpFitResult fit_exponential(const TimeSeries& series) {
  return fit_exponential(series.rows);
}

struct QuadOptions {
  double rel_tol = 1e-10;
  int max_depth = 40;
  double tail_factor = 40.0;  // integral truncated at tail_factor / kappa
};

namespace detail {

template <class F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm, double fb,
                        double whole, double tol, int depth, int max_depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  if (depth >= max_depth)
    throw NumericalError("adaptive_simpson: quadrature did not converge");
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1, max_depth) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1, max_depth);
}

template <class F>
double integrate(const F& f, double a, double b, double rel_tol, int max_depth) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double tol = std::max(std::abs(whole), 1e-3) * rel_tol;
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 0, max_depth);
}

}  // namespace detail

/// Quadrature evaluation of the reduced-dynamics kernel rate: the memory
/// integral int_0^inf e^{-kappa tau/2} cos(Delta tau) d tau is integrated
/// numerically (truncated, with the tail bound reported) and combined with
/// the coupling weights sum_m |Theta^l_{mn}|^2 taken from the derived
/// coupling table. Serves as an independent check of polarization_rate.
inline double tcl2_numeric_rate(double theta, double delta, double g, double kappa,
                                const QuadOptions& quad = {}, double* tail_bound = nullptr) {
  if (kappa <= 0) throw NumericalError("tcl2_numeric_rate: kappa must be positive");
  CircuitParams params;
  params.n_qubits = 1;
  params.g_mhz = g / two_pi;
  const QubitTarget target{theta, 0.0};
  const CouplingTable table = coupling_coefficients(params, {target});
  const double weight = table.sum_abs2_theta_ang(-1, 1);  // (rad/us)^2

  const double t_cut = quad.tail_factor / kappa;
  auto kernel = [&](double tau) { return std::exp(-0.5 * kappa * tau) * std::cos(delta * tau); };
  const double eta_quad = detail::integrate(kernel, 0.0, t_cut, quad.rel_tol, quad.max_depth);
  if (tail_bound) *tail_bound = (2.0 / kappa) * std::exp(-0.5 * quad.tail_factor);

  return 2.0 * eta_quad * weight;
}

}  // namespace qreset

#endif  // QRESET_RATES_HPP

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

#ifndef QRESET_INTEGRATOR_HPP
#define QRESET_INTEGRATOR_HPP

#include <algorithm>
#include <cmath>

#include "qreset/core.hpp"

namespace qreset {

struct StepperOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double dt_max = std::numeric_limits<double>::infinity();
  double dt_min = 1e-14;
  double dt_init = 1e-5;
};

/// Dormand-Prince 5(4) embedded pair with FSAL, on any Eigen-like dense
/// complex container (vector or matrix).
template <class State>
class Dopri5 {
 public:
  explicit Dopri5(StepperOptions opts) : opts_(opts) {}

  template <class Rhs>
  void reset(Rhs&& f, double t, const State& y) {
    k1_ = y;  // shape
    f(t, y, k1_);
    k2_ = k1_;
    k3_ = k1_;
    k4_ = k1_;
    k5_ = k1_;
    k6_ = k1_;
    k7_ = k1_;
    ytmp_ = k1_;
    dt_ = std::min(opts_.dt_init, opts_.dt_max);
  }

  double suggested_dt() const { return dt_; }
  void suggest_dt(double dt) { dt_ = std::clamp(dt, opts_.dt_min, opts_.dt_max); }

  /// One error-controlled step from (t, y), never stepping past t_limit.
  /// On return y and t are advanced. Throws on step-size underflow.
  template <class Rhs>
  void step(Rhs&& f, double& t, State& y, double t_limit) {
    for (;;) {
      double dt = std::min({dt_, opts_.dt_max, t_limit - t});
      if (dt < opts_.dt_min)
        throw NumericalError("integrator: step size underflow (tolerance unattainable)");
      const double err = attempt(f, t, y, dt, ynew_);
      const bool clipped = dt < dt_;
      if (err <= 1.0) {
        t += dt;
        y.swap(ynew_);
        k1_.swap(k7_);  // FSAL
        if (!clipped) dt_ = dt * grow_factor(err);
        return;
      }
      dt_ = dt * shrink_factor(err);
      if (dt_ < opts_.dt_min)
        throw NumericalError("integrator: step size underflow (tolerance unattainable)");
    }
  }

  /// Raw 5th-order step of size dt from (t, y) into `out` (no error control,
  /// no state advance, k1 preserved). Used to probe inside an accepted step.
  template <class Rhs>
  void probe(Rhs&& f, double t, const State& y, double dt, State& out) {
    attempt(f, t, y, dt, out);
  }

  /// Invalidate FSAL after the state was modified externally (e.g. a jump).
  template <class Rhs>
  void rearm(Rhs&& f, double t, const State& y) {
    f(t, y, k1_);
  }

  /// State at the start of the most recent accepted step.
  const State& previous() const { return ynew_; }

 private:
  double grow_factor(double err) const {
    if (err <= 0.0) return 5.0;
    return std::clamp(0.9 * std::pow(err, -0.2), 1.0, 5.0);
  }
  double shrink_factor(double err) const {
    return std::clamp(0.9 * std::pow(err, -0.2), 0.2, 0.9);
  }

  template <class Rhs>
  double attempt(Rhs&& f, double t, const State& y, double dt, State& out) {
    // Dormand-Prince tableau.
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                     b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;

    ytmp_ = y + (dt * a21) * k1_;
    f(t + c2 * dt, ytmp_, k2_);
    ytmp_ = y + dt * (a31 * k1_ + a32 * k2_);
    f(t + c3 * dt, ytmp_, k3_);
    ytmp_ = y + dt * (a41 * k1_ + a42 * k2_ + a43 * k3_);
    f(t + c4 * dt, ytmp_, k4_);
    ytmp_ = y + dt * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
    f(t + c5 * dt, ytmp_, k5_);
    ytmp_ = y + dt * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
    f(t + dt, ytmp_, k6_);
    out = y + dt * (b1 * k1_ + b3 * k3_ + b4 * k4_ + b5 * k5_ + b6 * k6_);
    f(t + dt, out, k7_);

    // Weighted RMS of the embedded error estimate.
    const auto* py = y.data();
    const auto* pn = out.data();
    const auto* p1 = k1_.data();
    const auto* p3 = k3_.data();
    const auto* p4 = k4_.data();
    const auto* p5 = k5_.data();
    const auto* p6 = k6_.data();
    const auto* p7 = k7_.data();
    const Eigen::Index n = y.size();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const cxd e = dt * (e1 * p1[i] + e3 * p3[i] + e4 * p4[i] + e5 * p5[i] +
                          e6 * p6[i] + e7 * p7[i]);
      const double scale =
          opts_.abs_tol + opts_.rel_tol * std::max(std::abs(py[i]), std::abs(pn[i]));
      const double q = std::abs(e) / scale;
      acc += q * q;
    }
    return std::sqrt(acc / static_cast<double>(std::max<Eigen::Index>(n, 1)));
  }

  StepperOptions opts_;
  double dt_ = 1e-5;
  State k1_, k2_, k3_, k4_, k5_, k6_, k7_, ytmp_, ynew_;
};

}  // namespace qreset

#endif  // QRESET_INTEGRATOR_HPP

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

#ifndef QRESET_CORE_HPP
#define QRESET_CORE_HPP

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace qreset {

using cxd = std::complex<double>;
using SparseCxd = Eigen::SparseMatrix<cxd>;
using VecCxd = Eigen::VectorXcd;
using MatCxd = Eigen::MatrixXcd;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;
inline constexpr cxd iu{0.0, 1.0};

// Configuration I/O carries frequencies as f = omega/2pi (MHz or GHz) and
// times in microseconds. All internal dynamics uses angular rad/us; these
// helpers are the single conversion point.
inline constexpr double mhz_to_rad_us(double f_mhz) { return two_pi * f_mhz; }
inline constexpr double ghz_to_rad_us(double f_ghz) { return two_pi * f_ghz * 1e3; }

// 2018 CODATA exact values.
inline constexpr double planck_h_J_s = 6.62607015e-34;
inline constexpr double boltzmann_J_per_K = 1.380649e-23;

struct DimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace qreset

#endif  // QRESET_CORE_HPP

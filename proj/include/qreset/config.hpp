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

#ifndef QRESET_CONFIG_HPP
#define QRESET_CONFIG_HPP

#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qreset/dynamics.hpp"
#include "qreset/rates.hpp"

namespace qreset {

enum class SolverKind { Master, Trajectories, Rate };

enum class InitialQubits { Ground, MixedRotated, Bloch };
enum class InitialResonators { Vacuum, Thermal };

struct InitialState {
  InitialQubits qubits = InitialQubits::Ground;
  InitialResonators resonators = InitialResonators::Vacuum;
  std::vector<QubitTarget> bloch;  // per-qubit (theta0, phi0) when qubits == Bloch
};

struct OutputOptions {
  std::string dir = "out";
  std::string basename = "result";
  bool csv = true;
  bool svg = false;
};

/// Experiment description: key-value text schema with nested sections for
/// the circuit, targets, initial state, dissipation, simulation and output.
/// Units are carried in key names (MHz/GHz for f = omega/2pi, us, K).
struct ExperimentConfig {
  CircuitParams circuit;
  double drive_omega_bar_mhz = 100.0;
  std::vector<QubitTarget> targets;
  InitialState initial;
  DissipationParams dissipation;
  SimOptions sim;
  int sample_count = 51;
  SolverKind solver = SolverKind::Master;
  std::vector<std::string> observables = {"sz_rot"};
  OutputOptions output;
  bool convention_explicit = false;  // set when the config text names it

  void validate() const {
    circuit.validate();
    if (drive_omega_bar_mhz <= 0)
      throw ConfigError("drive.omega_bar_mhz: must be positive");
    if (static_cast<int>(targets.size()) != circuit.n_qubits)
      throw ConfigError("targets: expected one [target i] section per qubit (i = 1.." +
                        std::to_string(circuit.n_qubits) + ")");
    for (const auto& t : targets) t.validate();
    if (initial.qubits == InitialQubits::Bloch &&
        static_cast<int>(initial.bloch.size()) != circuit.n_qubits)
      throw ConfigError("initial: bloch preset needs one [initial i] section per qubit");
    for (const auto& t : initial.bloch) t.validate();
    dissipation.validate();
    sim.validate();
    if (sample_count < 2) throw ConfigError("sim.sample_count: must be >= 2");
    if (observables.empty()) throw ConfigError("run.observables: must not be empty");
    for (const auto& o : observables)
      if (o != "sz_rot" && o != "sx_rot" && o != "sy_rot" && o != "n_total" && o != "n_exc_rot")
        throw ConfigError("run.observables: unknown observable '" + o +
                          "' (valid: sz_rot, sx_rot, sy_rot, n_total, n_exc_rot)");
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& section, const std::string& key,
                           const std::string& value) {
  try {
    size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(section + "." + key + ": expected a number, got '" + value + "'");
  }
}

inline long long parse_int(const std::string& section, const std::string& key,
                           const std::string& value) {
  try {
    size_t pos = 0;
    const long long v = std::stoll(value, &pos);
    if (pos != value.size()) {
      // Accept integral-valued floats so numeric sweeps can target int fields.
      const double d = parse_double(section, key, value);
      const long long r = static_cast<long long>(d);
      if (double(r) != d)
        throw ConfigError(section + "." + key + ": expected an integer, got '" + value + "'");
      return r;
    }
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError(section + "." + key + ": expected an integer, got '" + value + "'");
  }
}

inline std::uint64_t parse_u64(const std::string& section, const std::string& key,
                               const std::string& value) {
  try {
    size_t pos = 0;
    const unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(section + "." + key + ": expected an unsigned integer, got '" + value + "'");
  }
}

inline bool parse_bool(const std::string& section, const std::string& key,
                       const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError(section + "." + key + ": expected true/false, got '" + value + "'");
}

inline std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : value) {
    if (c == ',') {
      const std::string t = trim(cur);
      if (!t.empty()) out.push_back(t);
      cur.clear();
    } else {
      cur += c;
    }
  }
  const std::string t = trim(cur);
  if (!t.empty()) out.push_back(t);
  return out;
}

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Section names are ("circuit", 0), ("target", i), ... after normalization.
struct SectionRef {
  std::string name;
  int index = 0;  // 1-based for indexed sections, 0 otherwise
};

inline SectionRef normalize_section(const std::string& raw) {
  const std::string s = trim(raw);
  // "target 2" or "target2" -> ("target", 2); likewise "initial N".
  size_t split = s.size();
  while (split > 0 && std::isdigit(static_cast<unsigned char>(s[split - 1]))) --split;
  const std::string head = trim(s.substr(0, split));
  const std::string tail = s.substr(split);
  if (!tail.empty() && (head == "target" || head == "initial"))
    return {head, std::atoi(tail.c_str())};
  return {s, 0};
}

inline void ensure_target_slot(std::vector<QubitTarget>& v, int index,
                               const std::string& section) {
  if (index < 1 || index > 64)
    throw ConfigError(section + ": qubit index must be in 1..64");
  if (static_cast<int>(v.size()) < index) v.resize(index);
}

/// Applies one (section, key, value) assignment. Unknown sections and keys
/// yield errors listing what would have been accepted.
inline void set_field(ExperimentConfig& cfg, const SectionRef& sec, const std::string& key,
                      const std::string& value) {
  const std::string where = sec.index ? sec.name + std::to_string(sec.index) : sec.name;
  auto unknown_key = [&](const char* valid) {
    throw ConfigError(where + "." + key + ": unknown key (valid: " + valid + ")");
  };

  if (sec.name == "circuit") {
    if (key == "n_qubits") cfg.circuit.n_qubits = static_cast<int>(parse_int(where, key, value));
    else if (key == "f_c_ghz") cfg.circuit.f_c_ghz = parse_double(where, key, value);
    else if (key == "f_l_ghz") cfg.circuit.f_l_ghz = parse_double(where, key, value);
    else if (key == "v_mhz") cfg.circuit.v_mhz = parse_double(where, key, value);
    else if (key == "g_mhz") cfg.circuit.g_mhz = parse_double(where, key, value);
    else if (key == "kappa_mhz") cfg.circuit.kappa_mhz = parse_double(where, key, value);
    else if (key == "t_c_kelvin") cfg.circuit.t_c_kelvin = parse_double(where, key, value);
    else if (key == "fock_levels") cfg.circuit.fock_levels = static_cast<int>(parse_int(where, key, value));
    else if (key == "temp_convention") {
      if (value == "physical") cfg.circuit.temp_convention = TempConvention::Physical;
      else if (value == "paper") cfg.circuit.temp_convention = TempConvention::Paper;
      else throw ConfigError("circuit.temp_convention: expected physical|paper, got '" + value + "'");
      cfg.convention_explicit = true;
    } else
      unknown_key("n_qubits, f_c_ghz, f_l_ghz, v_mhz, g_mhz, kappa_mhz, t_c_kelvin, "
                  "fock_levels, temp_convention");
  } else if (sec.name == "drive") {
    if (key == "omega_bar_mhz") cfg.drive_omega_bar_mhz = parse_double(where, key, value);
    else unknown_key("omega_bar_mhz");
  } else if (sec.name == "target" && sec.index > 0) {
    ensure_target_slot(cfg.targets, sec.index, where);
    if (key == "theta") cfg.targets[sec.index - 1].theta = parse_double(where, key, value);
    else if (key == "phi") cfg.targets[sec.index - 1].phi = parse_double(where, key, value);
    else unknown_key("theta, phi");
  } else if (sec.name == "initial" && sec.index > 0) {
    ensure_target_slot(cfg.initial.bloch, sec.index, where);
    if (key == "theta") cfg.initial.bloch[sec.index - 1].theta = parse_double(where, key, value);
    else if (key == "phi") cfg.initial.bloch[sec.index - 1].phi = parse_double(where, key, value);
    else unknown_key("theta, phi");
  } else if (sec.name == "initial") {
    if (key == "qubits") {
      if (value == "ground") cfg.initial.qubits = InitialQubits::Ground;
      else if (value == "mixed_rotated") cfg.initial.qubits = InitialQubits::MixedRotated;
      else if (value == "bloch") cfg.initial.qubits = InitialQubits::Bloch;
      else throw ConfigError("initial.qubits: expected ground|mixed_rotated|bloch, got '" + value + "'");
    } else if (key == "resonators") {
      if (value == "vacuum") cfg.initial.resonators = InitialResonators::Vacuum;
      else if (value == "thermal") cfg.initial.resonators = InitialResonators::Thermal;
      else throw ConfigError("initial.resonators: expected vacuum|thermal, got '" + value + "'");
    } else
      unknown_key("qubits, resonators");
  } else if (sec.name == "dissipation") {
    if (key == "enabled") cfg.dissipation.enabled = parse_bool(where, key, value);
    else if (key == "t_theta_us") cfg.dissipation.t_theta_us = parse_double(where, key, value);
    else if (key == "t_phi_us") cfg.dissipation.t_phi_us = parse_double(where, key, value);
    else if (key == "basis") {
      if (value == "rotated") cfg.dissipation.basis = DissipationBasis::Rotated;
      else if (value == "lab") cfg.dissipation.basis = DissipationBasis::Lab;
      else throw ConfigError("dissipation.basis: expected rotated|lab, got '" + value + "'");
    } else
      unknown_key("enabled, t_theta_us, t_phi_us, basis");
  } else if (sec.name == "sim") {
    if (key == "t_final_us") cfg.sim.t_final_us = parse_double(where, key, value);
    else if (key == "dt_max_us") cfg.sim.dt_max_us = parse_double(where, key, value);
    else if (key == "rel_tol") cfg.sim.rel_tol = parse_double(where, key, value);
    else if (key == "abs_tol") cfg.sim.abs_tol = parse_double(where, key, value);
    else if (key == "n_traj") cfg.sim.n_traj = static_cast<int>(parse_int(where, key, value));
    else if (key == "seed") cfg.sim.seed = parse_u64(where, key, value);
    else if (key == "sample_count") cfg.sample_count = static_cast<int>(parse_int(where, key, value));
    else
      unknown_key("t_final_us, dt_max_us, rel_tol, abs_tol, n_traj, seed, sample_count");
  } else if (sec.name == "run") {
    if (key == "solver") {
      if (value == "master") cfg.solver = SolverKind::Master;
      else if (value == "trajectories") cfg.solver = SolverKind::Trajectories;
      else if (value == "rate") cfg.solver = SolverKind::Rate;
      else throw ConfigError("run.solver: expected master|trajectories|rate, got '" + value + "'");
    } else if (key == "observables") {
      cfg.observables = split_list(value);
    } else
      unknown_key("solver, observables");
  } else if (sec.name == "output") {
    if (key == "dir") cfg.output.dir = value;
    else if (key == "basename") cfg.output.basename = value;
    else if (key == "formats") {
      cfg.output.csv = false;
      cfg.output.svg = false;
      for (const auto& f : split_list(value)) {
        if (f == "csv") cfg.output.csv = true;
        else if (f == "svg") cfg.output.svg = true;
        else throw ConfigError("output.formats: expected csv and/or svg, got '" + f + "'");
      }
    } else
      unknown_key("dir, basename, formats");
  } else {
    throw ConfigError("unknown section [" + sec.name +
                      "] (valid: circuit, drive, target N, initial, initial N, dissipation, "
                      "sim, run, output)");
  }
}

}  // namespace detail

/// Parses the key-value experiment schema. Unknown keys are rejected with
/// the accepted alternatives; invariant violations name the field.
inline ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  detail::SectionRef section{"", 0};
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
      section = detail::normalize_section(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (section.name.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": key outside any [section]");
    if (key.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    detail::set_field(cfg, section, key, value);
  }
  cfg.validate();
  return cfg;
}

/// Canonical serialized form; parse(serialize(parse(text))) is the identity.
inline std::string serialize_config(const ExperimentConfig& cfg) {
  using detail::fmt_double;
  std::ostringstream o;
  o << "# qreset experiment configuration\n";
  o << "# units: f = omega/2pi in GHz/MHz, times in us, temperatures in K, angles in rad\n";
  o << "[circuit]\n";
  o << "n_qubits = " << cfg.circuit.n_qubits << "\n";
  o << "f_c_ghz = " << fmt_double(cfg.circuit.f_c_ghz) << "\n";
  o << "f_l_ghz = " << fmt_double(cfg.circuit.f_l_ghz) << "\n";
  o << "v_mhz = " << fmt_double(cfg.circuit.v_mhz) << "\n";
  o << "g_mhz = " << fmt_double(cfg.circuit.g_mhz) << "\n";
  o << "kappa_mhz = " << fmt_double(cfg.circuit.kappa_mhz) << "\n";
  o << "t_c_kelvin = " << fmt_double(cfg.circuit.t_c_kelvin) << "\n";
  o << "fock_levels = " << cfg.circuit.fock_levels << "\n";
  o << "temp_convention = "
    << (cfg.circuit.temp_convention == TempConvention::Paper ? "paper" : "physical") << "\n";
  o << "\n[drive]\n";
  o << "omega_bar_mhz = " << fmt_double(cfg.drive_omega_bar_mhz) << "\n";
  for (size_t i = 0; i < cfg.targets.size(); ++i) {
    o << "\n[target " << (i + 1) << "]\n";
    o << "theta = " << fmt_double(cfg.targets[i].theta) << "\n";
    o << "phi = " << fmt_double(cfg.targets[i].phi) << "\n";
  }
  o << "\n[initial]\n";
  o << "qubits = "
    << (cfg.initial.qubits == InitialQubits::Ground
            ? "ground"
            : cfg.initial.qubits == InitialQubits::MixedRotated ? "mixed_rotated" : "bloch")
    << "\n";
  o << "resonators = "
    << (cfg.initial.resonators == InitialResonators::Vacuum ? "vacuum" : "thermal") << "\n";
  if (cfg.initial.qubits == InitialQubits::Bloch) {
    for (size_t i = 0; i < cfg.initial.bloch.size(); ++i) {
      o << "\n[initial " << (i + 1) << "]\n";
      o << "theta = " << fmt_double(cfg.initial.bloch[i].theta) << "\n";
      o << "phi = " << fmt_double(cfg.initial.bloch[i].phi) << "\n";
    }
  }
  o << "\n[dissipation]\n";
  o << "enabled = " << (cfg.dissipation.enabled ? "true" : "false") << "\n";
  o << "t_theta_us = " << fmt_double(cfg.dissipation.t_theta_us) << "\n";
  o << "t_phi_us = " << fmt_double(cfg.dissipation.t_phi_us) << "\n";
  o << "basis = " << (cfg.dissipation.basis == DissipationBasis::Rotated ? "rotated" : "lab")
    << "\n";
  o << "\n[sim]\n";
  o << "t_final_us = " << fmt_double(cfg.sim.t_final_us) << "\n";
  o << "dt_max_us = " << fmt_double(cfg.sim.dt_max_us) << "\n";
  o << "rel_tol = " << fmt_double(cfg.sim.rel_tol) << "\n";
  o << "abs_tol = " << fmt_double(cfg.sim.abs_tol) << "\n";
  o << "n_traj = " << cfg.sim.n_traj << "\n";
  o << "seed = " << cfg.sim.seed << "\n";
  o << "sample_count = " << cfg.sample_count << "\n";
  o << "\n[run]\n";
  o << "solver = "
    << (cfg.solver == SolverKind::Master
            ? "master"
            : cfg.solver == SolverKind::Trajectories ? "trajectories" : "rate")
    << "\n";
  o << "observables = ";
  for (size_t i = 0; i < cfg.observables.size(); ++i)
    o << (i ? "," : "") << cfg.observables[i];
  o << "\n";
  o << "\n[output]\n";
  o << "dir = " << cfg.output.dir << "\n";
  o << "basename = " << cfg.output.basename << "\n";
  o << "formats = " << (cfg.output.csv ? (cfg.output.svg ? "csv,svg" : "csv")
                                       : (cfg.output.svg ? "svg" : "")) << "\n";
  return o.str();
}

/// Applies "section.key=value" (indexed sections as e.g. target2.theta).
inline void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError("override '" + assignment + "': expected path=value");
  const std::string path = detail::trim(assignment.substr(0, eq));
  const std::string value = detail::trim(assignment.substr(eq + 1));
  const auto dot = path.find('.');
  if (dot == std::string::npos)
    throw ConfigError("override '" + path + "': expected section.key");
  const auto sec = detail::normalize_section(path.substr(0, dot));
  detail::set_field(cfg, sec, path.substr(dot + 1), value);
}

}  // namespace qreset

#endif  // QRESET_CONFIG_HPP

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

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qreset/scenario.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw qreset::IoError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

struct GlobalArgs {
  std::string config_path;
  std::string out_dir;
  std::string format;
  std::string convention;
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

qreset::ExperimentConfig load_config(const GlobalArgs& g, bool scenario_default_convention) {
  qreset::ExperimentConfig cfg;
  if (!g.config_path.empty()) {
    cfg = qreset::parse_config(read_file(g.config_path));
  } else if (!scenario_default_convention && !cfg.convention_explicit) {
    cfg.circuit.temp_convention = qreset::TempConvention::Physical;
  }
  if (!g.convention.empty()) {
    if (g.convention == "physical")
      cfg.circuit.temp_convention = qreset::TempConvention::Physical;
    else if (g.convention == "paper")
      cfg.circuit.temp_convention = qreset::TempConvention::Paper;
    else
      throw qreset::ConfigError("--convention: expected physical|paper");
    cfg.convention_explicit = true;
  }
  for (const auto& s : g.sets) qreset::apply_override(cfg, s);
  if (g.seed_given) cfg.sim.seed = g.seed;
  if (!g.out_dir.empty()) cfg.output.dir = g.out_dir;
  if (!g.format.empty()) {
    cfg.output.csv = false;
    cfg.output.svg = false;
    for (const auto& f : qreset::detail::split_list(g.format)) {
      if (f == "csv") cfg.output.csv = true;
      else if (f == "svg") cfg.output.svg = true;
      else throw qreset::ConfigError("--format: expected csv and/or svg");
    }
  }
  return cfg;
}

void emit_and_report(const qreset::ResultTable& table, const qreset::OutputOptions& opts) {
  const auto written = qreset::emit_outputs(table, opts);
  for (const auto& p : written) std::cout << "wrote " << p << "\n";
}

void print_rates(const qreset::ExperimentConfig& cfg) {
  using namespace qreset;
  const ModeSpectrum modes = mode_frequencies(cfg.circuit, cfg.drive_omega_bar_mhz);
  const double delta = mhz_to_rad_us(modes.delta_mhz);
  const double g = cfg.circuit.g_ang();
  const double kappa = cfg.circuit.kappa_ang();
  const double n_bar = thermal_occupancy(cfg.circuit.f_c_ghz, cfg.circuit.t_c_kelvin,
                                         cfg.circuit.temp_convention);
  const EtaLambda el = eta_lambda(kappa, delta);
  std::printf("delta_omega/2pi = %g MHz, Delta/2pi = %g MHz, n_bar = %.6g\n",
              cfg.circuit.delta_omega_mhz(), modes.delta_mhz, n_bar);
  std::printf("eta = %.6g us, lambda = %.6g us\n", el.eta, el.lambda);
  std::printf("%-6s %-10s %-10s %-14s %-14s\n", "qubit", "theta", "phi", "Gamma_1_per_us",
              "T_pol_us");
  for (int n = 1; n <= cfg.circuit.n_qubits; ++n) {
    const auto& t = cfg.targets[n - 1];
    const double gamma = polarization_rate(t.theta, delta, g, kappa);
    const double t_pol = polarization_time(t.theta, delta, g, kappa);
    std::printf("%-6d %-10.6g %-10.6g %-14.6g %-14.6g\n", n, t.theta, t.phi, gamma, t_pol);
  }
}

void print_steady(const qreset::ExperimentConfig& cfg) {
  using namespace qreset;
  const double n_bar = thermal_occupancy(cfg.circuit.f_c_ghz, cfg.circuit.t_c_kelvin,
                                         cfg.circuit.temp_convention);
  const double sz = steady_state_sz(cfg.circuit.f_c_ghz, cfg.circuit.t_c_kelvin,
                                    cfg.circuit.temp_convention);
  std::printf("T_c = %g K, f_c = %g GHz, convention = %s\n", cfg.circuit.t_c_kelvin,
              cfg.circuit.f_c_ghz,
              cfg.circuit.temp_convention == TempConvention::Paper ? "paper" : "physical");
  std::printf("n_bar = %.8g\n", n_bar);
  std::printf("steady <sigma_z_rot> = %.8g\n", sz);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qreset - dissipative multi-qubit reset simulator for multi-resonator "
               "circuit-QED networks"};
  app.require_subcommand(1);

  GlobalArgs g;
  app.add_option("--config", g.config_path, "experiment config file");
  app.add_option("--seed", g.seed, "master seed")->each([&](const std::string&) {
    g.seed_given = true;
  });
  app.add_option("--out", g.out_dir, "output directory");
  app.add_option("--format", g.format, "output formats: csv[,svg]");
  app.add_option("--convention", g.convention,
                 "thermal convention: physical|paper (default: paper for scenarios, "
                 "physical otherwise)");
  app.add_option("--set", g.sets, "config override section.key=value (repeatable)");

  auto* cmd_rates = app.add_subcommand("rates", "print analytic polarization rates and times");
  auto* cmd_steady = app.add_subcommand("steady", "print thermal occupancy and steady state");
  auto* cmd_evolve = app.add_subcommand("evolve", "density-matrix evolution of the network");
  auto* cmd_mc = app.add_subcommand("mc", "Monte Carlo trajectory evolution of the network");
  auto* cmd_sweep = app.add_subcommand("sweep", "run the experiment over an axis of values");
  auto* cmd_scenario = app.add_subcommand("scenario", "run a named preset scenario");

  std::string sweep_axis;
  std::string sweep_values;
  cmd_sweep->add_option("--axis", sweep_axis, "numeric config path, e.g. circuit.g_mhz")
      ->required();
  cmd_sweep->add_option("--values", sweep_values, "comma-separated values")->required();

  std::string scenario_name;
  cmd_scenario
      ->add_option("name", scenario_name, "fig2 | fig2_inset | fig3a | fig3b | fig3c | "
                                          "n1_validation")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_rates->parsed()) {
      print_rates(load_config(g, false));
    } else if (cmd_steady->parsed()) {
      print_steady(load_config(g, false));
    } else if (cmd_evolve->parsed()) {
      qreset::ExperimentConfig cfg = load_config(g, false);
      cfg.solver = qreset::SolverKind::Master;
      if (cfg.output.basename == "result") cfg.output.basename = "evolve";
      emit_and_report(qreset::run_experiment(cfg), cfg.output);
    } else if (cmd_mc->parsed()) {
      qreset::ExperimentConfig cfg = load_config(g, false);
      cfg.solver = qreset::SolverKind::Trajectories;
      if (cfg.output.basename == "result") cfg.output.basename = "mc";
      emit_and_report(qreset::run_experiment(cfg), cfg.output);
    } else if (cmd_sweep->parsed()) {
      qreset::ExperimentConfig cfg = load_config(g, false);
      std::vector<double> values;
      for (const auto& v : qreset::detail::split_list(sweep_values))
        values.push_back(qreset::detail::parse_double("sweep", "values", v));
      if (cfg.output.basename == "result") cfg.output.basename = "sweep";
      emit_and_report(qreset::run_sweep(cfg, sweep_axis, values), cfg.output);
    } else if (cmd_scenario->parsed()) {
      // Scenario presets carry their own configuration; --set/--seed/--out
      // and --convention apply on top.
      std::vector<std::string> overrides = g.sets;
      if (g.seed_given) overrides.push_back("sim.seed=" + std::to_string(g.seed));
      if (!g.convention.empty()) {
        if (g.convention != "physical" && g.convention != "paper")
          throw qreset::ConfigError("--convention: expected physical|paper");
        overrides.push_back("circuit.temp_convention=" + g.convention);
      }
      const qreset::ResultTable table = qreset::run_scenario(scenario_name, overrides);
      qreset::OutputOptions out = qreset::scenario_config(scenario_name).output;
      if (!g.out_dir.empty()) out.dir = g.out_dir;
      if (!g.format.empty()) {
        out.csv = false;
        out.svg = false;
        for (const auto& f : qreset::detail::split_list(g.format)) {
          if (f == "csv") out.csv = true;
          else if (f == "svg") out.svg = true;
          else throw qreset::ConfigError("--format: expected csv and/or svg");
        }
      }
      emit_and_report(table, out);
    }
  } catch (const qreset::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const qreset::DimensionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const qreset::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const qreset::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

// Copyright 2026 The nvsim Authors
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

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "nvsim/charge_model.hpp"
#include "nvsim/dynamics.hpp"
#include "nvsim/executor.hpp"
#include "nvsim/physics.hpp"
#include "nvsim/readout.hpp"
#include "nvsim/sequence.hpp"

namespace nvsim {

struct SpectroscopyConfig {
  Isotope isotope = Isotope::N14;
  double linewidth = 0.05;     ///< MHz, acceptance scale for line positions
  double step = 0.002;         ///< MHz
  double f_min = 0.2;          ///< MHz
  double f_max = 12.0;         ///< MHz
  double rf_amplitude = 5e-3;  ///< T
};

struct LifetimeConfig {
  double rabi_amplitude = 5e-5;     ///< T, weak drive for the long Rabi trace
  double rabi_step = 1000.0;        ///< us
  double rabi_span = 66000.0;       ///< us
  std::vector<double> minus_echo_taus{0, 50, 100, 200, 400, 800, 1200};  ///< us
};

struct RegisterConfig {
  double k_dd = 6.62607015e-8;  ///< MHz nm^3 / (MHz/T)^2, secular dipolar prefactor
  double swap_error = 0.0;      ///< probability that a swap gate does nothing
  ElectronAttachment dark_attachment = ElectronAttachment::Ground;
};

/// Everything a run needs. Times in us, fields in T, frequencies in MHz.
struct Config {
  PhysicalParams params;
  RelaxationSet relaxation;
  VoltageProfile profile;
  ReadoutModel readout;
  ElectronAttachment attachment = ElectronAttachment::MaximallyMixed;

  double guard = 2000.0;
  double rf_amplitude = 5e-3;
  double mw_amplitude = 1e-4;
  double start_voltage = -8.0;
  double selectivity_window = 0.05;
  double detuning_window = 0.1;

  std::vector<double> scan_voltages;  ///< charge scan voltages
  SpectroscopyConfig spectroscopy;
  LifetimeConfig lifetimes;
  RegisterConfig reg;

  std::uint64_t seed = 0;
  std::string output_dir = ".";

  void validate() const;
  CompileOptions compile_options() const;
  ExecutorOptions executor_options(GateModel gate = GateModel::Physical) const;
};

/// Built-in defaults (identical to config/defaults.yaml).
Config default_config();
/// Defaults overridden by a YAML document. Unknown keys, wrong types and
/// out-of-range values throw Error(Config) naming the key.
Config parse_config(std::string_view yaml);
Config load_config(const std::string& path);
/// YAML rendering that parse_config reads back to the same Config.
std::string dump_config(const Config& config);

}  // namespace nvsim

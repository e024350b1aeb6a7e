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
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "nvsim/config.hpp"
#include "nvsim/fit.hpp"
#include "nvsim/register.hpp"

namespace nvsim {

using Cell = std::variant<double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

/// A reported quantity. For fitted values `error` and the interval come from
/// the fit; derived values carry NaN there when no error is defined.
struct Reported {
  std::string name;
  std::string unit;
  double value = 0.0;
  double error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::string note;  ///< e.g. "no decay"
};

struct Check {
  std::string name;
  double value = 0.0;
  double target = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

struct ExperimentResult {
  std::string name;
  std::uint64_t seed = 0;
  int shots = 0;  ///< 0: exact probabilities
  Table table;
  std::vector<Reported> reported;
  std::vector<Check> checks;
  std::vector<std::string> notes;
  std::vector<std::string> warnings;

  bool passed() const;
  const Reported* find(const std::string& name) const;
  const Check* find_check(const std::string& name) const;
};

/// RFC 4180 CSV of the result table (header row, CRLF line ends avoided:
/// lines end in \n; fields with commas, quotes or newlines are quoted).
std::string to_csv(const Table& table);
/// JSON summary with a stable key order: name, seed, shots, reported,
/// checks, passed, notes, warnings, table.
std::string to_json(const ExperimentResult& result);

/// Decay constant extracted from a fit with rate parameter k: 1/k with its
/// interval, or "no decay" when the data are flat or k sits at zero.
Reported decay_time(const std::string& name, const FitResult& fit, int rate_index,
                    const std::string& unit, double scale);

// Experiments. `shots` = 0 gives exact flip probabilities.

ExperimentResult run_charge_scan(const Config& config, const std::vector<double>& voltages, int shots);
ExperimentResult run_rabi_comparison(const Config& config, int shots);
/// `t_u` in us; empty uses the settle-scan template sweep.
ExperimentResult run_settling_scan(const Config& config, const std::vector<double>& t_u, int shots);
ExperimentResult run_quadrupole_spectroscopy(const Config& config);
ExperimentResult run_echo(const Config& config, int shots);
ExperimentResult run_t1(const Config& config, int shots);
/// Echo, T1 and long Rabi in NV+, echo in NV-, and the lengthening ratio.
ExperimentResult run_lifetimes(const Config& config, int shots);

/// Executes every sweep binding of a program with the ensemble executor.
ExperimentResult run_program(const Config& config, const PulseProgram& program, int shots,
                             GateModel gate = GateModel::Physical);

/// Register scenario: two nodes and a list of steps.
struct ProtocolStep {
  enum class Kind { Phase, Wait } kind = Kind::Phase;
  ProtocolPhase phase = ProtocolPhase::Initialization;
  int node = 0;       ///< readout target
  double wait = 0.0;  ///< us
};

struct ProtocolScenario {
  std::vector<Node> nodes;
  bool noiseless = false;
  double storage_tau = 15000.0;  ///< us, for the storage comparison
  std::vector<ProtocolStep> steps;
};

ProtocolScenario parse_scenario(std::string_view yaml);
ProtocolScenario load_scenario(const std::string& path);
/// Default scenario: two 15N nodes 10 nm apart perpendicular to the NV axis.
ProtocolScenario default_scenario();
ExperimentResult run_protocol(const Config& config, const ProtocolScenario& scenario);

/// Fraction of `reps` shot-noise repetitions whose 95% interval contains the
/// generating value, per recovered parameter.
std::map<std::string, double> closed_loop_coverage(const Config& config, int reps, int shots);

/// Names accepted by run_experiment.
const std::vector<std::string>& experiment_names();
/// Dispatch by name with shots = config.readout.shots.
ExperimentResult run_experiment(const std::string& name, const Config& config);

}  // namespace nvsim

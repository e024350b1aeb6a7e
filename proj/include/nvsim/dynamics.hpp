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

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nvsim/density_matrix.hpp"
#include "nvsim/linalg.hpp"
#include "nvsim/physics.hpp"

namespace nvsim {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct DriveField {
  double amplitude = 0.0;  ///< B1, tesla
  double frequency = 0.0;  ///< MHz
  double phase = 0.0;      ///< radians
};

/// Phenomenological lifetimes for one charge state, in microseconds.
/// Infinite values switch the corresponding channel off.
struct RelaxationParams {
  double t1_n = kInfinity;
  double t2_n = kInfinity;
  double t1_e = kInfinity;        ///< electron depolarization (ignored for NV+)
  double rabi_decay = kInfinity;  ///< coherence damping of the driven pair

  /// Rejects non-positive values and T2 > d/(d-1) T1, the bound for the
  /// channel to stay completely positive.
  void validate(int nuclear_dim) const;
};

struct RelaxationSet {
  RelaxationParams minus;
  RelaxationParams zero;
  RelaxationParams plus;

  const RelaxationParams& get(ChargeState charge) const;
  RelaxationParams& get(ChargeState charge);
};

DensityMatrix evolve_unitary(const DensityMatrix& rho, const Operator& hamiltonian, double t);
DensityMatrix evolve_unitary(const DensityMatrix& rho, const Eigensystem& eig, double t);

/// Transition of H0 that a drive at `frequency` addresses.
struct ResonantPair {
  int upper = -1;  ///< eigen index with the higher energy
  int lower = -1;
  double transition = 0.0;       ///< E_upper - E_lower, MHz
  double detuning = 0.0;         ///< transition - drive frequency
  Complex matrix_element{0, 0};  ///< <upper| V |lower> per unit field
};

/// Closest allowed transition to `frequency`; nullopt when no pair couples.
std::optional<ResonantPair> find_resonant_pair(const Eigensystem& eig, const Operator& drive_op,
                                               double frequency);

struct DrivenOptions {
  double detuning_window = 0.1;  ///< MHz; farther transitions are treated as undriven
  double rabi_decay = kInfinity;  ///< us
  double t_start = 0.0;           ///< absolute time of the segment start (phase reference)
};

struct DrivenResult {
  DensityMatrix rho;
  std::optional<ResonantPair> pair;
  double rabi_frequency = 0.0;  ///< B1 |V_ab|, MHz
  std::string warning;          ///< non-empty when the drive addressed nothing
};

/// Rotating-frame evolution of the addressed two-level transition, all other
/// levels evolving freely.
DrivenResult evolve_driven(const DensityMatrix& rho, const Eigensystem& h0, const Operator& drive_op,
                           const DriveField& drive, double t, const DrivenOptions& options = {});
DrivenResult evolve_driven(const DensityMatrix& rho, const Operator& h0, const Operator& drive_op,
                           const DriveField& drive, double t, const DrivenOptions& options = {});

/// Lab-frame RK4 integration of H0 + cos(2 pi f t + phi) B1 V with a step no
/// larger than 1/(50 f_max). Unitary only; meant as a reference.
DensityMatrix evolve_driven_lab_frame(const DensityMatrix& rho, const Operator& h0,
                                      const Operator& drive_op, const DriveField& drive, double t,
                                      double t_start = 0.0);

/// Relaxation of `rho` in the space of (charge, isotope) for a time t.
DensityMatrix apply_relaxation(const DensityMatrix& rho, double t, const RelaxationParams& r,
                               ChargeState charge, Isotope isotope);

/// A nuclear transition prepared in `upper` and driven towards upper - 1.
struct SpinSetup {
  ChargeState charge = ChargeState::Plus;
  Isotope isotope = Isotope::N15;
  Projection sector{0};
  Projection upper{1};
};

struct Trace {
  std::vector<double> x;
  std::vector<double> y;
};

struct AddressedLine {
  double frequency = 0.0;  ///< |E(upper) - E(lower)|, MHz
  double rabi_per_tesla = 0.0;
  int initial_state = -1;  ///< eigen index prepared before the drive
  int target_state = -1;
};

AddressedLine addressed_line(const SpinSetup& setup, const PhysicalParams& p);

/// Initial state used by the simulate_* traces: the exact eigenstate
/// labelled (sector, upper).
DensityMatrix prepared_state(const SpinSetup& setup, const PhysicalParams& p);

/// Flip probability (population of the target eigenstate) against drive duration.
/// `b1` in tesla; the drive is resonant with the addressed line.
Trace simulate_rabi(const SpinSetup& setup, const PhysicalParams& p, const RelaxationParams& r,
                    double b1, const std::vector<double>& durations);

/// Phase-cycled echo amplitude |P(0) - P(pi)| against total free time 2 tau.
/// `detuning` (MHz) adds detuning * I_z to H0 while the drive frequency stays fixed.
Trace simulate_echo(const SpinSetup& setup, const PhysicalParams& p, const RelaxationParams& r,
                    double b1, const std::vector<double>& taus, double detuning = 0.0);

/// Population of the initial eigenstate against wait time.
Trace simulate_t1(const SpinSetup& setup, const PhysicalParams& p, const RelaxationParams& r,
                  const std::vector<double>& waits);

}  // namespace nvsim

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

#include "nvsim/density_matrix.hpp"
#include "nvsim/physics.hpp"
#include "nvsim/random.hpp"

namespace nvsim {

struct ChargeDistribution {
  double w_minus = 1.0;
  double w_zero = 0.0;
  double w_plus = 0.0;

  double weight(ChargeState charge) const;
  double& weight(ChargeState charge);
  /// Largest weight; ties go to the more negative charge.
  ChargeState most_likely() const;
  void validate() const;
};

/// Double-sigmoid voltage dependence of the charge state. Voltages in V,
/// settle_tau in microseconds.
struct VoltageProfile {
  double v_minus_zero = -2.0;
  double v_zero_plus = 6.0;
  double width1 = 1.0;
  double width2 = 0.35;
  double w_minus_max = 0.7;
  double w_plus_max = 1.0;
  double w_minus_high_v = 0.0;  ///< NV- leak that reappears with NV+ at high voltage
  double settle_tau = 540.0;

  void validate() const;
};

ChargeDistribution steady_state_distribution(double voltage, const VoltageProfile& prof);

/// Exponential relaxation towards steady_state_distribution(voltage).
ChargeDistribution settle(const ChargeDistribution& current, double voltage, double t,
                          const VoltageProfile& prof);

/// Electron state attached when entering NV- or NV0.
enum class ElectronAttachment { MaximallyMixed, Ground };

/// Electron state of `charge` used on attachment: mS = 0 for NV- and
/// mS = -1/2 for NV0 when `Ground`, identity/d otherwise.
Operator electron_attachment_state(ChargeState charge, ElectronAttachment attach);

/// Keeps the nuclear reduced state, replaces the electron. Linear, so it also
/// accepts unnormalised (weighted) states.
Operator switch_charge(const Operator& rho, ChargeState from, ChargeState to, Isotope isotope,
                       ElectronAttachment attach = ElectronAttachment::MaximallyMixed);
DensityMatrix switch_charge(const DensityMatrix& rho, ChargeState from, ChargeState to,
                            Isotope isotope, const PhysicalParams& p,
                            ElectronAttachment attach = ElectronAttachment::MaximallyMixed);

/// Nuclear reduced density matrix of a state in the (charge, isotope) space.
Operator nuclear_reduced(const Operator& rho, ChargeState charge, Isotope isotope);

/// r = k V^a / n_s^b. Lengths in nm, n_s in cm^-2.
double depletion_radius(double v_gate, double n_s, double a = 0.75, double b = 0.75, double k = 1.0);
/// Prefactor k giving dr/dV = slope (nm/V) at voltage v for the given n_s, a, b.
double depletion_prefactor(double slope, double v, double n_s, double a, double b);

/// Per-trajectory charge telegraph: at rate 1/settle_tau the charge is redrawn
/// from the steady state of the current voltage.
class TelegraphSampler {
 public:
  TelegraphSampler(std::uint64_t seed, ChargeState initial) : rng_(seed), state_(initial) {}

  ChargeState state() const { return state_; }
  void reset(ChargeState state) { state_ = state; }
  /// Draws a charge from `dist` (used after laser initialisation).
  ChargeState draw(const ChargeDistribution& dist);
  /// Advances by `t` microseconds at fixed voltage; returns the new state.
  ChargeState advance(double voltage, double t, const VoltageProfile& prof);

 private:
  Rng rng_;
  ChargeState state_;
};

}  // namespace nvsim

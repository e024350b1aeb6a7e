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

#include "nvsim/charge_model.hpp"

#include <array>
#include <cmath>

#include "nvsim/spin.hpp"

namespace nvsim {

double ChargeDistribution::weight(ChargeState charge) const {
  switch (charge) {
    case ChargeState::Minus: return w_minus;
    case ChargeState::Zero: return w_zero;
    case ChargeState::Plus: return w_plus;
  }
  return 0.0;
}

double& ChargeDistribution::weight(ChargeState charge) {
  switch (charge) {
    case ChargeState::Minus: return w_minus;
    case ChargeState::Zero: return w_zero;
    case ChargeState::Plus: break;
  }
  return w_plus;
}

ChargeState ChargeDistribution::most_likely() const {
  ChargeState best = ChargeState::Minus;
  for (ChargeState c : kAllChargeStates) {
    if (weight(c) > weight(best)) best = c;
  }
  return best;
}

void ChargeDistribution::validate() const {
  for (double w : {w_minus, w_zero, w_plus}) {
    if (!(w >= -1e-15 && w <= 1 + 1e-15)) {
      throw Error(ErrorCode::InvalidArgument, "charge probabilities must lie in [0, 1]");
    }
  }
  if (std::abs(w_minus + w_zero + w_plus - 1.0) > 1e-12) {
    throw Error(ErrorCode::InvalidArgument, "charge probabilities must sum to 1");
  }
}

void VoltageProfile::validate() const {
  auto bad = [](const char* msg) { throw Error(ErrorCode::InvalidArgument, msg); };
  if (!std::isfinite(v_minus_zero) || !std::isfinite(v_zero_plus)) bad("transition voltages must be finite");
  if (!(v_minus_zero < v_zero_plus)) bad("v_minus_zero must be below v_zero_plus");
  if (!(width1 > 0) || !(width2 > 0)) bad("sigmoid widths must be > 0");
  for (double w : {w_minus_max, w_plus_max, w_minus_high_v}) {
    if (!(w >= 0 && w <= 1)) bad("plateau probabilities must lie in [0, 1]");
  }
  if (!(settle_tau > 0) || !std::isfinite(settle_tau)) bad("settle_tau must be finite and > 0");
}

ChargeDistribution steady_state_distribution(double voltage, const VoltageProfile& prof) {
  const double s1 = 1.0 / (1.0 + std::exp((voltage - prof.v_minus_zero) / prof.width1));
  const double s2 = 1.0 / (1.0 + std::exp(-(voltage - prof.v_zero_plus) / prof.width2));
  ChargeDistribution d;
  d.w_plus = prof.w_plus_max * s2;
  d.w_minus = (1.0 - d.w_plus) * (prof.w_minus_max * s1 + prof.w_minus_high_v * (1.0 - s1) * s2);
  d.w_zero = 1.0 - d.w_plus - d.w_minus;
  return d;
}

ChargeDistribution settle(const ChargeDistribution& current, double voltage, double t,
                          const VoltageProfile& prof) {
  if (!(t >= 0)) throw Error(ErrorCode::InvalidArgument, "settle: duration must be >= 0");
  if (t == 0.0) return current;
  const ChargeDistribution target = steady_state_distribution(voltage, prof);
  const double keep = std::exp(-t / prof.settle_tau);
  ChargeDistribution out;
  out.w_minus = target.w_minus + (current.w_minus - target.w_minus) * keep;
  out.w_plus = target.w_plus + (current.w_plus - target.w_plus) * keep;
  out.w_zero = 1.0 - out.w_minus - out.w_plus;
  return out;
}

Operator electron_attachment_state(ChargeState charge, ElectronAttachment attach) {
  const SpinQuantum s = electron_spin(charge);
  const int d = s.multiplicity();
  if (attach == ElectronAttachment::MaximallyMixed || d == 1) return identity(d) / static_cast<double>(d);
  const Projection ground = charge == ChargeState::Minus ? Projection{0} : Projection{-1};
  Operator e = Operator::Zero(d, d);
  const int k = projection_index(s, ground);
  e(k, k) = 1.0;
  return e;
}

Operator nuclear_reduced(const Operator& rho, ChargeState charge, Isotope isotope) {
  const SpaceLayout layout = layout_for(charge, isotope);
  if (rho.rows() != layout.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "nuclear_reduced: state does not match charge/isotope");
  }
  if (layout.electron_dim == 1) return rho;
  const std::array<int, 2> dims{layout.electron_dim, layout.nuclear_dim};
  const std::array<int, 1> keep{1};
  return partial_trace(rho, dims, keep);
}

Operator switch_charge(const Operator& rho, ChargeState from, ChargeState to, Isotope isotope,
                       ElectronAttachment attach) {
  if (from == to) return rho;
  const Operator nuclear = nuclear_reduced(rho, from, isotope);
  if (to == ChargeState::Plus) return nuclear;
  return kron(electron_attachment_state(to, attach), nuclear);
}

DensityMatrix switch_charge(const DensityMatrix& rho, ChargeState from, ChargeState to,
                            Isotope isotope, const PhysicalParams& p, ElectronAttachment attach) {
  p.validate();
  return DensityMatrix::unchecked(switch_charge(rho.matrix(), from, to, isotope, attach));
}

double depletion_radius(double v_gate, double n_s, double a, double b, double k) {
  if (!(v_gate > 0) || !(n_s > 0)) {
    throw Error(ErrorCode::InvalidArgument, "depletion_radius: gate voltage and n_s must be > 0");
  }
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(k)) {
    throw Error(ErrorCode::InvalidArgument, "depletion_radius: non-finite parameter");
  }
  return k * std::pow(v_gate, a) / std::pow(n_s, b);
}

double depletion_prefactor(double slope, double v, double n_s, double a, double b) {
  if (!(v > 0) || !(n_s > 0) || !(a > 0)) {
    throw Error(ErrorCode::InvalidArgument, "depletion_prefactor: v, n_s and a must be > 0");
  }
  return slope * std::pow(n_s, b) / (a * std::pow(v, a - 1.0));
}

ChargeState TelegraphSampler::draw(const ChargeDistribution& dist) {
  state_ = kAllChargeStates[rng_.categorical({dist.w_minus, dist.w_zero, dist.w_plus})];
  return state_;
}

ChargeState TelegraphSampler::advance(double voltage, double t, const VoltageProfile& prof) {
  if (!(t >= 0)) throw Error(ErrorCode::InvalidArgument, "telegraph: duration must be >= 0");
  if (t == 0.0) return state_;
  // At least one redraw within t happens with probability 1 - exp(-t/tau);
  // only the last one matters at fixed voltage.
  if (rng_.bernoulli(-std::expm1(-t / prof.settle_tau))) {
    draw(steady_state_distribution(voltage, prof));
  }
  return state_;
}

}  // namespace nvsim

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

#include "nvsim/readout.hpp"

#include <cmath>

#include "nvsim/spin.hpp"

namespace nvsim {

double ReadoutModel::rate(ChargeState charge) const {
  switch (charge) {
    case ChargeState::Minus: return rate_minus;
    case ChargeState::Zero: return rate_zero();
    case ChargeState::Plus: return 0.0;
  }
  return 0.0;
}

ChargeDistribution ReadoutModel::illuminated() const {
  return ChargeDistribution{illuminated_minus, 1.0 - illuminated_minus, 0.0};
}

void ReadoutModel::validate() const {
  auto bad = [](const char* msg) { throw Error(ErrorCode::InvalidArgument, msg); };
  if (!(baseline >= 0)) bad("readout baseline must be >= 0");
  if (!(contrast > 0)) bad("readout contrast must be > 0");
  if (!(baseline + contrast <= 1 + 1e-12)) bad("readout baseline + contrast must be <= 1");
  if (!(rate_minus >= 0) || !std::isfinite(rate_minus)) bad("photon rate must be finite and >= 0");
  if (!(rate_zero_ratio >= 0)) bad("rate_zero_ratio must be >= 0");
  if (!(illuminated_minus >= 0 && illuminated_minus <= 1)) bad("illuminated_minus must lie in [0, 1]");
  if (!(init_depolarization >= 0 && init_depolarization <= 1)) bad("init_depolarization must lie in [0, 1]");
  if (shots < 0) bad("shots must be >= 0");
}

double signal_from_flip_probability(double p, const ReadoutModel& model) {
  if (!(p >= -1e-12 && p <= 1 + 1e-12)) {
    throw Error(ErrorCode::InvalidArgument, "flip probability must lie in [0, 1]");
  }
  return model.baseline + model.contrast * p;
}

double flip_probability_from_signal(double signal, const ReadoutModel& model) {
  return (signal - model.baseline) / model.contrast;
}

Operator laser_init_operator(const Operator& rho, ChargeState charge, Isotope isotope,
                             const ReadoutModel& model) {
  Operator nuclear = nuclear_reduced(rho, charge, isotope);
  if (model.init_depolarization > 0) {
    const double eps = model.init_depolarization;
    const int d = static_cast<int>(nuclear.rows());
    nuclear = (1.0 - eps) * nuclear + eps * nuclear.trace() / static_cast<double>(d) * identity(d);
  }
  return kron(electron_attachment_state(ChargeState::Minus, ElectronAttachment::Ground), nuclear);
}

LaserInitResult laser_init(const DensityMatrix& rho, ChargeState charge, Isotope isotope,
                           const ReadoutModel& model) {
  return {DensityMatrix::unchecked(laser_init_operator(rho.matrix(), charge, isotope, model)),
          model.illuminated()};
}

namespace {

// Projector onto nuclear m_I in the (charge, isotope) product space.
Operator nuclear_projector(ChargeState charge, Isotope isotope, Projection m) {
  const SpaceLayout layout = layout_for(charge, isotope);
  Operator local = Operator::Zero(layout.nuclear_dim, layout.nuclear_dim);
  const int k = projection_index(nuclear_spin(isotope), m);
  local(k, k) = 1.0;
  return kron(identity(layout.electron_dim), local);
}

}  // namespace

double nuclear_population(const Operator& rho, ChargeState charge, Isotope isotope, Projection m) {
  return (nuclear_projector(charge, isotope, m) * rho).trace().real();
}

ReadoutOutcome single_shot_readout(const DensityMatrix& rho, ChargeState charge, Isotope isotope,
                                   Projection reference, const ReadoutModel& model, Rng& rng) {
  const SpinQuantum spin = nuclear_spin(isotope);
  if (!projection_valid(spin, reference)) {
    throw Error(ErrorCode::InvalidArgument, "readout reference m_I is invalid for this isotope");
  }
  const double total = rho.matrix().trace().real();
  const double u = rng.uniform() * total;
  double acc = 0.0;
  Projection measured = projection_at(spin, spin.multiplicity() - 1);
  for (int k = 0; k < spin.multiplicity(); ++k) {
    const Projection m = projection_at(spin, k);
    const double p = nuclear_population(rho.matrix(), charge, isotope, m);
    acc += p;
    if (p > 0 && u < acc) {
      measured = m;
      break;
    }
  }
  const Operator proj = nuclear_projector(charge, isotope, measured);
  Operator collapsed = proj * rho.matrix() * proj;
  collapsed /= collapsed.trace().real();

  const bool flipped = measured != reference;
  ReadoutOutcome out;
  out.measured = measured;
  out.bright = rng.bernoulli(model.baseline + model.contrast * (flipped ? 1.0 : 0.0));
  if (out.bright == flipped) {
    out.reported = measured;
  } else if (flipped) {
    out.reported = reference;
  } else {
    // Misassigned as flipped: report the neighbouring level.
    const Projection below{reference.twice - 2};
    out.reported = projection_valid(spin, below) ? below : Projection{reference.twice + 2};
  }
  out.collapsed = DensityMatrix::unchecked(0.5 * (collapsed + collapsed.adjoint()));
  return out;
}

double fluorescence_trace(const ChargeDistribution& dist, const ReadoutModel& model, double duration) {
  if (!(duration >= 0)) throw Error(ErrorCode::InvalidArgument, "fluorescence duration must be >= 0");
  const double seconds = duration / kMicrosecondsPerSecond;
  return seconds * (dist.w_minus * model.rate_minus + dist.w_zero * model.rate_zero() +
                    dist.w_plus * model.rate(ChargeState::Plus));
}

std::uint64_t sample_fluorescence(const ChargeDistribution& dist, const ReadoutModel& model,
                                  double duration, Rng& rng) {
  return rng.poisson(fluorescence_trace(dist, model, duration));
}

}  // namespace nvsim

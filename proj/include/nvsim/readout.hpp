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

#include "nvsim/charge_model.hpp"
#include "nvsim/density_matrix.hpp"
#include "nvsim/random.hpp"

namespace nvsim {

struct ReadoutModel {
  double baseline = 0.3;
  double contrast = 0.4;
  double rate_minus = 1e5;          ///< photons/s
  double rate_zero_ratio = 0.5;     ///< rate_zero = ratio * rate_minus; NV+ is dark
  double illuminated_minus = 0.7;   ///< NV- fraction under illumination
  double init_depolarization = 0.0; ///< nuclear depolarization per laser init
  int shots = 10000;  ///< per sweep point; 0 reports exact probabilities

  double rate_zero() const { return rate_zero_ratio * rate_minus; }
  double rate(ChargeState charge) const;
  /// Probability of assigning the true outcome, (1 + contrast) / 2.
  double fidelity() const { return 0.5 * (1.0 + contrast); }
  ChargeDistribution illuminated() const;
  void validate() const;
};

/// Signal b + c p for flip probability p.
double signal_from_flip_probability(double p, const ReadoutModel& model);
/// Inverse map, unclipped so shot noise is preserved.
double flip_probability_from_signal(double signal, const ReadoutModel& model);

struct LaserInitResult {
  DensityMatrix rho;  ///< NV- state, electron in mS = 0
  ChargeDistribution charge;
};

/// Optical re-initialisation: electron to mS = 0 of NV-, nuclear state kept
/// (optionally depolarized by model.init_depolarization).
LaserInitResult laser_init(const DensityMatrix& rho, ChargeState charge, Isotope isotope,
                           const ReadoutModel& model);
/// Same channel on an unnormalised operator, returning the NV- operator.
Operator laser_init_operator(const Operator& rho, ChargeState charge, Isotope isotope,
                             const ReadoutModel& model);

struct ReadoutOutcome {
  Projection measured;   ///< projective nuclear outcome
  Projection reported;   ///< assigned label after the finite-fidelity mapping
  bool bright = false;   ///< reported as flipped relative to the reference
  DensityMatrix collapsed;
};

/// Projective m_I measurement. The outcome is reported as flipped (bright)
/// with probability b + c [measured != reference].
ReadoutOutcome single_shot_readout(const DensityMatrix& rho, ChargeState charge, Isotope isotope,
                                   Projection reference, const ReadoutModel& model, Rng& rng);

/// Probability of finding m_I = m in the nuclear reduced state.
double nuclear_population(const Operator& rho, ChargeState charge, Isotope isotope, Projection m);

/// Expected counts over `duration` microseconds.
double fluorescence_trace(const ChargeDistribution& dist, const ReadoutModel& model, double duration);
std::uint64_t sample_fluorescence(const ChargeDistribution& dist, const ReadoutModel& model,
                                  double duration, Rng& rng);

}  // namespace nvsim

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

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "nvsim/charge_model.hpp"
#include "nvsim/dynamics.hpp"
#include "nvsim/readout.hpp"
#include "nvsim/sequence.hpp"

namespace nvsim {

/// How RF pulses act on charge states.
/// Physical: rotating-frame drive in whatever charge state is present.
/// IdealSelective: an exact nuclear rotation by the programmed angle, whatever
/// the electron state, in every charge state whose default-sector line for the
/// same m_I pair lies within `selectivity_window` of the pulse frequency.
enum class GateModel { Physical, IdealSelective };

struct ExecutorOptions {
  PhysicalParams params;
  RelaxationSet relaxation;
  VoltageProfile profile;
  ReadoutModel readout;
  GateModel gate = GateModel::Physical;
  double selectivity_window = 0.05;  ///< MHz
  double detuning_window = 0.1;      ///< MHz
  ElectronAttachment attachment = ElectronAttachment::MaximallyMixed;
  double start_voltage = -8.0;
  /// Waits are split into chunks of at most this fraction of settle_tau
  /// (capped at max_chunks) so charge jumps can occur inside them.
  double chunk_fraction = 0.2;
  int max_chunks = 200;

  void validate() const;
};

struct ReadoutRecord {
  double time = 0.0;
  double flip_probability = 0.0;  ///< 1 - P(m_I = initial)
  ChargeDistribution charge;
};

struct EnsembleResult {
  std::vector<ReadoutRecord> readouts;
  ChargeDistribution final_charge;
};

struct TrajectoryResult {
  std::vector<bool> bright;
  std::vector<Projection> measured;
  std::vector<ChargeState> charge_at_readout;
};

/// Estimate of a flip probability from shots: k bright out of n.
struct ShotEstimate {
  std::uint64_t shots = 0;
  std::uint64_t bright = 0;
  double mean_signal = 0.0;
  double flip = 0.0;         ///< (mean_signal - b) / c, unclipped
  double flip_stderr = 0.0;  ///< binomial error propagated through the affine map
};

/// Draws `shots` single-shot outcomes of a readout whose flip probability is p.
ShotEstimate sample_shots(double flip_probability, const ReadoutModel& model, std::uint64_t shots,
                          Rng& rng);
ShotEstimate estimate_from_counts(std::uint64_t bright, std::uint64_t shots, const ReadoutModel& model);

/// Runs compiled schedules. The charge state is frozen within a segment and
/// redrawn from the steady state at rate 1/settle_tau between segments (and
/// between chunks of long waits).
class Executor {
 public:
  Executor(ExecutorOptions options, Isotope isotope);

  /// Called after every segment with the per-charge (unnormalised) states.
  using SegmentObserver = std::function<void(std::size_t, const std::array<Operator, 3>&)>;

  /// Exact average over charge trajectories: one weighted state per charge.
  EnsembleResult run(const CompiledSchedule& schedule, const SegmentObserver& observe = {}) const;
  /// One sampled trajectory with single-shot readouts.
  TrajectoryResult run_trajectory(const CompiledSchedule& schedule, Rng& rng) const;

  const ExecutorOptions& options() const { return options_; }
  /// Initial nuclear projection (m_I = +I) against which flips are counted.
  Projection initial_projection() const { return Projection{nuclear_spin(isotope_).twice}; }

 private:
  struct ChargeCache {
    Eigensystem eig;
    Operator drive;
    std::vector<NmrLine> lines;  ///< default sector
  };

  Operator initial_state(ChargeState charge) const;
  Operator free_evolve(const Operator& rho, ChargeState charge, double t, bool relax) const;
  Operator drive_segment(const Operator& rho, ChargeState charge, const Segment& seg) const;
  double flip_probability(const Operator& rho, ChargeState charge) const;
  std::vector<double> chunks(double duration) const;

  ExecutorOptions options_;
  Isotope isotope_;
  std::array<ChargeCache, 3> cache_;
};

}  // namespace nvsim

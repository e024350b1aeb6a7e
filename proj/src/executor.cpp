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

#include "nvsim/executor.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "nvsim/spin.hpp"

namespace nvsim {

namespace {

int charge_index(ChargeState c) { return static_cast<int>(c); }

}  // namespace

void ExecutorOptions::validate() const {
  params.validate();
  profile.validate();
  readout.validate();
  if (!(selectivity_window > 0) || !(detuning_window > 0)) {
    throw Error(ErrorCode::InvalidArgument, "executor windows must be > 0");
  }
  if (!(chunk_fraction > 0) || max_chunks < 1) {
    throw Error(ErrorCode::InvalidArgument, "executor chunking parameters must be positive");
  }
}

ShotEstimate estimate_from_counts(std::uint64_t bright, std::uint64_t shots, const ReadoutModel& model) {
  if (shots == 0) throw Error(ErrorCode::InvalidArgument, "shot count must be > 0");
  ShotEstimate e;
  e.shots = shots;
  e.bright = bright;
  e.mean_signal = static_cast<double>(bright) / static_cast<double>(shots);
  e.flip = flip_probability_from_signal(e.mean_signal, model);
  // Use at least half a count so the error never collapses to zero.
  const double q = std::clamp(e.mean_signal, 0.5 / shots, 1.0 - 0.5 / shots);
  e.flip_stderr = std::sqrt(q * (1.0 - q) / static_cast<double>(shots)) / model.contrast;
  return e;
}

ShotEstimate sample_shots(double flip_probability, const ReadoutModel& model, std::uint64_t shots,
                          Rng& rng) {
  const double q = signal_from_flip_probability(std::clamp(flip_probability, 0.0, 1.0), model);
  return estimate_from_counts(rng.binomial(shots, q), shots, model);
}

Executor::Executor(ExecutorOptions options, Isotope isotope)
    : options_(std::move(options)), isotope_(isotope) {
  options_.validate();
  for (ChargeState c : kAllChargeStates) {
    const auto& rel = options_.relaxation.get(c);
    rel.validate(nuclear_spin(isotope_).multiplicity());
    ChargeCache& cc = cache_[charge_index(c)];
    cc.eig = diagonalize(build_hamiltonian(c, isotope_, options_.params));
    cc.drive = drive_operator(c, isotope_, options_.params);
    cc.lines = nmr_transition_frequencies(c, isotope_, default_sector(c), options_.params);
  }
}

Operator Executor::initial_state(ChargeState charge) const {
  const int dn = nuclear_spin(isotope_).multiplicity();
  Operator nuclear = Operator::Zero(dn, dn);
  nuclear(0, 0) = 1.0;  // m_I = +I
  if (charge == ChargeState::Plus) return nuclear;
  return kron(electron_attachment_state(charge, options_.attachment), nuclear);
}

Operator Executor::free_evolve(const Operator& rho, ChargeState charge, double t, bool relax) const {
  if (t == 0.0) return rho;
  const ChargeCache& cc = cache_[charge_index(charge)];
  DensityMatrix r = evolve_unitary(DensityMatrix::unchecked(rho), cc.eig, t);
  if (relax) r = apply_relaxation(r, t, options_.relaxation.get(charge), charge, isotope_);
  return r.matrix();
}

Operator Executor::drive_segment(const Operator& rho, ChargeState charge, const Segment& seg) const {
  const DrivePayload& d = *seg.drive;
  const ChargeCache& cc = cache_[charge_index(charge)];
  if (options_.gate == GateModel::IdealSelective && d.kind == TransitionKind::Nuclear) {
    const Projection upper = std::max(d.from, d.to);
    const Projection lower = std::min(d.from, d.to);
    bool selected = false;
    for (const auto& line : cc.lines) {
      if (line.upper == upper && line.lower == lower &&
          std::abs(std::abs(line.frequency) - d.frequency) <= options_.selectivity_window) {
        selected = true;
      }
    }
    Operator out = rho;
    if (selected) {
      const SpinQuantum i = nuclear_spin(isotope_);
      const int dn = i.multiplicity();
      const int u = projection_index(i, upper);
      const int l = projection_index(i, lower);
      const double half = 0.5 * (d.angle > 0 ? d.angle : 0.0);
      Operator r = identity(dn);
      r(u, u) = std::cos(half);
      r(l, l) = std::cos(half);
      r(u, l) = Complex(0, -1) * std::sin(half) * std::polar(1.0, -d.phase);
      r(l, u) = Complex(0, -1) * std::sin(half) * std::polar(1.0, d.phase);
      const Operator full = kron(identity(layout_for(charge, isotope_).electron_dim), r);
      out = full * rho * full.adjoint();
    }
    return free_evolve(out, charge, seg.duration, false);
  }
  DrivenOptions opt;
  opt.detuning_window = options_.detuning_window;
  opt.rabi_decay = options_.relaxation.get(charge).rabi_decay;
  opt.t_start = seg.start;
  const auto res = evolve_driven(DensityMatrix::unchecked(rho), cc.eig, cc.drive,
                                 DriveField{d.amplitude, d.frequency, d.phase}, seg.duration, opt);
  return res.rho.matrix();
}

double Executor::flip_probability(const Operator& rho, ChargeState charge) const {
  const double total = rho.trace().real();
  return total - nuclear_population(rho, charge, isotope_, initial_projection());
}

std::vector<double> Executor::chunks(double duration) const {
  if (duration <= 0) return {duration};
  const double max_chunk = options_.chunk_fraction * options_.profile.settle_tau;
  const int n = std::clamp(static_cast<int>(std::ceil(duration / max_chunk)), 1, options_.max_chunks);
  return std::vector<double>(n, duration / n);
}

EnsembleResult Executor::run(const CompiledSchedule& schedule, const SegmentObserver& observe) const {
  if (schedule.isotope != isotope_) {
    throw Error(ErrorCode::InvalidArgument, "schedule isotope does not match the executor");
  }
  double voltage = options_.start_voltage;
  std::array<Operator, 3> rho;
  const ChargeDistribution start = steady_state_distribution(voltage, options_.profile);
  for (ChargeState c : kAllChargeStates) rho[charge_index(c)] = start.weight(c) * initial_state(c);

  auto weights = [&] {
    ChargeDistribution d;
    d.w_minus = rho[0].trace().real();
    d.w_zero = rho[1].trace().real();
    d.w_plus = rho[2].trace().real();
    return d;
  };
  // Redraw from the steady state with probability 1 - exp(-t/tau).
  auto mix = [&](double t) {
    if (t <= 0) return;
    const double stay = std::exp(-t / options_.profile.settle_tau);
    const ChargeDistribution ss = steady_state_distribution(voltage, options_.profile);
    std::array<Operator, 3> next;
    for (ChargeState to : kAllChargeStates) {
      Operator pooled = Operator::Zero(rho[charge_index(to)].rows(), rho[charge_index(to)].cols());
      for (ChargeState from : kAllChargeStates) {
        pooled += switch_charge(rho[charge_index(from)], from, to, isotope_, options_.attachment);
      }
      next[charge_index(to)] = stay * rho[charge_index(to)] + (1.0 - stay) * ss.weight(to) * pooled;
    }
    rho = std::move(next);
  };

  EnsembleResult result;
  for (std::size_t index = 0; index < schedule.segments.size(); ++index) {
    const Segment& seg = schedule.segments[index];
    switch (seg.kind) {
      case SegmentKind::VoltageSet:
        voltage = seg.voltage;
        break;
      case SegmentKind::LaserInit: {
        Operator x = Operator::Zero(rho[0].rows(), rho[0].cols());
        for (ChargeState c : kAllChargeStates) {
          x += laser_init_operator(rho[charge_index(c)], c, isotope_, options_.readout);
        }
        const ChargeDistribution lit = options_.readout.illuminated();
        for (ChargeState c : kAllChargeStates) {
          rho[charge_index(c)] =
              lit.weight(c) * switch_charge(x, ChargeState::Minus, c, isotope_, options_.attachment);
        }
        break;
      }
      case SegmentKind::RelaxWait:
      case SegmentKind::Unitary: {
        const bool relax = seg.kind == SegmentKind::RelaxWait;
        for (double dt : chunks(seg.duration)) {
          for (ChargeState c : kAllChargeStates) {
            rho[charge_index(c)] = free_evolve(rho[charge_index(c)], c, dt, relax);
          }
          mix(dt);
        }
        break;
      }
      case SegmentKind::Driven:
        for (ChargeState c : kAllChargeStates) {
          rho[charge_index(c)] = drive_segment(rho[charge_index(c)], c, seg);
        }
        mix(seg.duration);
        break;
      case SegmentKind::Readout: {
        ReadoutRecord rec;
        rec.time = seg.start;
        for (ChargeState c : kAllChargeStates) {
          rec.flip_probability += flip_probability(rho[charge_index(c)], c);
        }
        rec.charge = weights();
        result.readouts.push_back(rec);
        break;
      }
    }
    if (observe) observe(index, rho);
  }
  result.final_charge = weights();
  return result;
}

TrajectoryResult Executor::run_trajectory(const CompiledSchedule& schedule, Rng& rng) const {
  if (schedule.isotope != isotope_) {
    throw Error(ErrorCode::InvalidArgument, "schedule isotope does not match the executor");
  }
  double voltage = options_.start_voltage;
  TelegraphSampler charge(rng.next(), ChargeState::Minus);
  charge.draw(steady_state_distribution(voltage, options_.profile));
  Operator rho = initial_state(charge.state());

  auto jump = [&](double t) {
    const ChargeState before = charge.state();
    const ChargeState after = charge.advance(voltage, t, options_.profile);
    rho = switch_charge(rho, before, after, isotope_, options_.attachment);
  };

  TrajectoryResult result;
  for (const Segment& seg : schedule.segments) {
    switch (seg.kind) {
      case SegmentKind::VoltageSet:
        voltage = seg.voltage;
        break;
      case SegmentKind::LaserInit: {
        const Operator x = laser_init_operator(rho, charge.state(), isotope_, options_.readout);
        charge.draw(options_.readout.illuminated());
        rho = switch_charge(x, ChargeState::Minus, charge.state(), isotope_, options_.attachment);
        break;
      }
      case SegmentKind::RelaxWait:
      case SegmentKind::Unitary:
        for (double dt : chunks(seg.duration)) {
          rho = free_evolve(rho, charge.state(), dt, seg.kind == SegmentKind::RelaxWait);
          jump(dt);
        }
        break;
      case SegmentKind::Driven:
        rho = drive_segment(rho, charge.state(), seg);
        jump(seg.duration);
        break;
      case SegmentKind::Readout: {
        const auto out = single_shot_readout(DensityMatrix::unchecked(rho), charge.state(), isotope_,
                                             initial_projection(), options_.readout, rng);
        rho = out.collapsed.matrix();
        result.bright.push_back(out.bright);
        result.measured.push_back(out.measured);
        result.charge_at_readout.push_back(charge.state());
        break;
      }
    }
  }
  return result;
}

}  // namespace nvsim

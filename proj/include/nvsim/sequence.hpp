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

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nvsim/charge_model.hpp"
#include "nvsim/physics.hpp"

namespace nvsim {

// Pulse-program language (.pseq). See docs/pseq-grammar.md for the grammar.

enum class Channel { Laser, MW, RF, Voltage };
std::string_view to_string(Channel channel);

/// Number with the unit it was written in; `unit` is empty for plain numbers.
struct Quantity {
  double value = 0.0;
  std::string unit;

  friend bool operator==(const Quantity&, const Quantity&) = default;
};

/// Either a literal quantity or a `$name` sweep-variable reference.
struct ValueRef {
  std::optional<Quantity> literal;
  std::string variable;

  friend bool operator==(const ValueRef&, const ValueRef&) = default;
};

enum class TransitionKind { Nuclear, Electron };

/// `transition <id> nuclear ms=<m> <mI> <mI> [in <charge>]` or
/// `transition <id> electron mi=<m> <mS> <mS> [in <charge>]`.
struct TransitionDecl {
  std::string id;
  TransitionKind kind = TransitionKind::Nuclear;
  Projection spectator;  ///< m_S for nuclear, m_I for electron transitions
  Projection from;
  Projection to;
  std::optional<ChargeState> charge;

  friend bool operator==(const TransitionDecl&, const TransitionDecl&) = default;
};

struct AmplitudeDecl {
  std::string id;
  Quantity value;

  friend bool operator==(const AmplitudeDecl&, const AmplitudeDecl&) = default;
};

struct SweepDecl {
  std::string name;
  std::vector<Quantity> values;

  friend bool operator==(const SweepDecl&, const SweepDecl&) = default;
};

enum class EventKind { LaserInit, Voltage, Wait, Evolve, Pulse, Readout };

struct Event {
  EventKind kind = EventKind::Wait;
  std::optional<ValueRef> at;
  ValueRef value;  ///< voltage, wait/evolve duration, or fixed pulse duration
  // Pulse payload.
  Channel channel = Channel::RF;
  std::string angle;     ///< "pi", "pi/2", "90deg", ...; empty for `for <t>` pulses
  std::string transition;
  std::string amplitude; ///< amplitude id, empty for the default
  std::optional<ValueRef> phase;
  int line = 0;          ///< source line, not part of equality

  bool operator==(const Event& o) const {
    return kind == o.kind && at == o.at && value == o.value && channel == o.channel &&
           angle == o.angle && transition == o.transition && amplitude == o.amplitude &&
           phase == o.phase;
  }
};

struct PulseProgram {
  std::string name;
  std::optional<Isotope> isotope;
  std::optional<Quantity> guard;
  std::vector<AmplitudeDecl> amplitudes;
  std::vector<TransitionDecl> transitions;
  std::vector<SweepDecl> sweeps;
  std::vector<Event> events;

  friend bool operator==(const PulseProgram&, const PulseProgram&) = default;

  const TransitionDecl* find_transition(const std::string& id) const;
  const AmplitudeDecl* find_amplitude(const std::string& id) const;
  const SweepDecl* find_sweep(const std::string& name) const;
};

/// Throws ParseError with line/column for syntax errors, unknown references
/// and same-channel overlaps detectable at parse time.
PulseProgram parse_program(std::string_view text);
std::string print_program(const PulseProgram& program);

/// Quantity converted to base units: us, V, T, or radians for angles.
double time_us(const Quantity& q);
double volts(const Quantity& q);
double tesla(const Quantity& q);
double degrees_to_radians(const Quantity& q);
/// "pi", "pi/2", "2pi", "3pi/2", "90deg" -> radians.
double parse_angle(std::string_view text);

using Bindings = std::map<std::string, Quantity>;

/// Cartesian product of the program's sweep declarations, first sweep slowest.
std::vector<Bindings> expand_sweeps(const PulseProgram& program);

enum class SegmentKind { Unitary, Driven, RelaxWait, VoltageSet, LaserInit, Readout };
std::string_view to_string(SegmentKind kind);

struct DrivePayload {
  Channel channel = Channel::RF;
  std::string transition;
  TransitionKind kind = TransitionKind::Nuclear;
  ChargeState charge = ChargeState::Minus;  ///< resolved charge state
  Projection spectator;
  Projection from;
  Projection to;
  double frequency = 0.0;       ///< MHz, |E(from) - E(to)|
  double amplitude = 0.0;       ///< T
  double phase = 0.0;           ///< rad
  double rabi_frequency = 0.0;  ///< MHz
  double angle = 0.0;           ///< rad, 0 for fixed-duration pulses
};

struct Segment {
  SegmentKind kind = SegmentKind::RelaxWait;
  double start = 0.0;     ///< us
  double duration = 0.0;  ///< us
  double voltage = 0.0;   ///< target voltage of VoltageSet; voltage in force otherwise
  ChargeDistribution expected;  ///< steady-state annotation at `voltage`
  std::optional<DrivePayload> drive;
};

struct CompiledSchedule {
  std::string name;
  Isotope isotope = Isotope::N15;
  std::vector<Segment> segments;
  std::vector<std::string> warnings;
  double total_duration = 0.0;
};

struct CompileOptions {
  PhysicalParams params;
  VoltageProfile profile;
  ChargeDistribution illuminated{0.7, 0.3, 0.0};
  double guard = 2000.0;             ///< us, used unless the program sets `guard`
  double rf_amplitude = 5e-3;        ///< T, default for pulses without an amplitude
  double mw_amplitude = 1e-4;        ///< T
  double start_voltage = -8.0;       ///< V
  Isotope default_isotope = Isotope::N15;
};

/// Throws Error(Compile) for unbound variables, guard violations, overlaps and
/// transitions that do not exist in the resolved charge state.
CompiledSchedule compile(const PulseProgram& program, const CompileOptions& options,
                         const Bindings& bindings = {});

/// Stable JSON dump (fixed key order, shortest round-trip numbers).
std::string schedule_to_json(const CompiledSchedule& schedule);

/// charge-probe, rabi, settle-scan, echo, t1.
const std::map<std::string, PulseProgram>& builtin_templates();
const PulseProgram& builtin_template(const std::string& name);
/// Source text of a template, as shipped.
std::string_view builtin_template_source(const std::string& name);

}  // namespace nvsim

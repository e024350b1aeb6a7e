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

#include "nvsim/sequence.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "json.hpp"

#include "nvsim/linalg.hpp"

namespace nvsim {

namespace {

struct Token {
  std::string text;
  int column = 0;
};

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    const char c = line[i];
    if (c == '#') break;
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    if (c == '[' || c == ']' || c == ',') {
      tokens.push_back({std::string(1, c), static_cast<int>(i) + 1});
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r' &&
           line[i] != '#' && line[i] != '[' && line[i] != ']' && line[i] != ',') {
      ++i;
    }
    tokens.push_back({std::string(line.substr(start, i - start)), static_cast<int>(start) + 1});
  }
  return tokens;
}

const std::vector<std::string>& known_units() {
  static const std::vector<std::string> units{"ns", "us", "ms", "s", "V", "mV", "T", "mT", "uT", "deg"};
  return units;
}

bool is_unit(std::string_view u) {
  return std::find(known_units().begin(), known_units().end(), u) != known_units().end();
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_quantity(const Quantity& q) {
  return q.unit.empty() ? format_number(q.value) : format_number(q.value) + " " + q.unit;
}

std::string format_value(const ValueRef& v) {
  return v.literal ? format_quantity(*v.literal) : "$" + v.variable;
}

bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
}

// Cursor over one line's tokens.
class LineParser {
 public:
  LineParser(int line_no, std::vector<Token> tokens, int line_length)
      : line_(line_no), tokens_(std::move(tokens)), end_column_(line_length + 1) {}

  bool done() const { return pos_ >= tokens_.size(); }
  const Token& peek() const { return tokens_[pos_]; }
  bool peek_is(std::string_view s) const { return !done() && tokens_[pos_].text == s; }
  int column() const { return done() ? end_column_ : tokens_[pos_].column; }
  int line() const { return line_; }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(line_, column(), msg); }
  [[noreturn]] void fail_at(int col, const std::string& msg) const { throw ParseError(line_, col, msg); }

  Token next(const char* what) {
    if (done()) fail(std::string("expected ") + what);
    return tokens_[pos_++];
  }

  void expect(std::string_view word) {
    if (done() || tokens_[pos_].text != word) fail("expected '" + std::string(word) + "'");
    ++pos_;
  }

  std::string identifier(const char* what) {
    const Token t = next(what);
    if (!is_identifier(t.text)) fail_at(t.column, std::string("invalid ") + what + " '" + t.text + "'");
    return t.text;
  }

  // Number with an attached or following unit; `unit_optional` allows bare numbers.
  Quantity quantity(const char* what, bool unit_optional = false) {
    const Token t = next(what);
    Quantity q;
    const char* first = t.text.data();
    const char* last = first + t.text.size();
    if (*first == '+') ++first;
    const auto res = std::from_chars(first, last, q.value);
    if (res.ec != std::errc() || !std::isfinite(q.value)) {
      fail_at(t.column, std::string("expected ") + what + ", got '" + t.text + "'");
    }
    std::string rest(res.ptr, last);
    if (rest.empty() && !done() && is_unit(peek().text)) rest = next("unit").text;
    if (rest.empty() && !unit_optional) fail_at(t.column, std::string("missing unit for ") + what);
    if (!rest.empty() && !is_unit(rest)) fail_at(t.column, "unknown unit '" + rest + "'");
    q.unit = rest;
    return q;
  }

  ValueRef value(const char* what, std::vector<std::pair<std::string, Token>>& var_uses) {
    if (!done() && !peek().text.empty() && peek().text[0] == '$') {
      const Token t = next(what);
      const std::string name = t.text.substr(1);
      if (!is_identifier(name)) fail_at(t.column, "invalid variable reference '" + t.text + "'");
      var_uses.push_back({name, Token{name, t.column}});
      return ValueRef{std::nullopt, name};
    }
    return ValueRef{quantity(what), ""};
  }

  void finish() {
    if (!done()) fail("unexpected '" + peek().text + "'");
  }

 private:
  int line_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  int end_column_;
};

struct Reference {
  std::string name;
  int line;
  int column;
  enum { Transition, Amplitude, Variable } kind;
};

}  // namespace

std::string_view to_string(Channel channel) {
  switch (channel) {
    case Channel::Laser: return "laser";
    case Channel::MW: return "mw";
    case Channel::RF: return "rf";
    case Channel::Voltage: return "voltage";
  }
  return "?";
}

std::string_view to_string(SegmentKind kind) {
  switch (kind) {
    case SegmentKind::Unitary: return "unitary";
    case SegmentKind::Driven: return "driven";
    case SegmentKind::RelaxWait: return "relax-wait";
    case SegmentKind::VoltageSet: return "voltage-set";
    case SegmentKind::LaserInit: return "laser-init";
    case SegmentKind::Readout: return "readout";
  }
  return "?";
}

const TransitionDecl* PulseProgram::find_transition(const std::string& id) const {
  for (const auto& t : transitions) {
    if (t.id == id) return &t;
  }
  return nullptr;
}

const AmplitudeDecl* PulseProgram::find_amplitude(const std::string& id) const {
  for (const auto& a : amplitudes) {
    if (a.id == id) return &a;
  }
  return nullptr;
}

const SweepDecl* PulseProgram::find_sweep(const std::string& name) const {
  for (const auto& s : sweeps) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

double time_us(const Quantity& q) {
  if (q.unit == "ns") return q.value * 1e-3;
  if (q.unit == "us") return q.value;
  if (q.unit == "ms") return q.value * 1e3;
  if (q.unit == "s") return q.value * 1e6;
  throw Error(ErrorCode::InvalidArgument, "expected a time, got unit '" + q.unit + "'");
}

double volts(const Quantity& q) {
  if (q.unit == "V") return q.value;
  if (q.unit == "mV") return q.value * 1e-3;
  throw Error(ErrorCode::InvalidArgument, "expected a voltage, got unit '" + q.unit + "'");
}

double tesla(const Quantity& q) {
  if (q.unit == "T") return q.value;
  if (q.unit == "mT") return q.value * 1e-3;
  if (q.unit == "uT") return q.value * 1e-6;
  throw Error(ErrorCode::InvalidArgument, "expected a magnetic field, got unit '" + q.unit + "'");
}

double degrees_to_radians(const Quantity& q) {
  if (q.unit == "deg") return q.value * kPi / 180.0;
  throw Error(ErrorCode::InvalidArgument, "expected an angle in deg, got unit '" + q.unit + "'");
}

double parse_angle(std::string_view text) {
  auto number = [&](std::string_view s, double fallback) {
    if (s.empty()) return fallback;
    double v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      throw Error(ErrorCode::InvalidArgument, "invalid angle '" + std::string(text) + "'");
    }
    return v;
  };
  if (text.size() > 3 && text.substr(text.size() - 3) == "deg") {
    return number(text.substr(0, text.size() - 3), 0.0) * kPi / 180.0;
  }
  const auto pi = text.find("pi");
  if (pi == std::string_view::npos) {
    throw Error(ErrorCode::InvalidArgument, "invalid angle '" + std::string(text) + "'");
  }
  const double factor = number(text.substr(0, pi), 1.0);
  std::string_view rest = text.substr(pi + 2);
  double divisor = 1.0;
  if (!rest.empty()) {
    if (rest[0] != '/') throw Error(ErrorCode::InvalidArgument, "invalid angle '" + std::string(text) + "'");
    divisor = number(rest.substr(1), 0.0);
    if (divisor <= 0) throw Error(ErrorCode::InvalidArgument, "invalid angle '" + std::string(text) + "'");
  }
  const double angle = factor * kPi / divisor;
  if (!(angle >= 0) || !std::isfinite(angle)) {
    throw Error(ErrorCode::InvalidArgument, "invalid angle '" + std::string(text) + "'");
  }
  return angle;
}

PulseProgram parse_program(std::string_view text) {
  PulseProgram prog;
  std::vector<Reference> refs;
  std::vector<std::pair<std::string, Token>> var_uses;
  // Literal `at` times per channel for parse-time overlap detection.
  std::vector<std::tuple<Channel, double, int>> fixed_times;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    const std::string_view raw = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    auto tokens = tokenize(raw);
    if (tokens.empty()) {
      if (eol == text.size()) break;
      continue;
    }
    LineParser lp(line_no, std::move(tokens), static_cast<int>(raw.size()));
    const std::size_t uses_before = var_uses.size();
    const Token head = lp.next("keyword");
    const std::string& kw = head.text;

    auto parse_at = [&](Event& ev) {
      if (lp.peek_is("at")) {
        lp.next("at");
        const int col = lp.column();
        ev.at = lp.value("time", var_uses);
        if (ev.at->literal) {
          double t = 0;
          try {
            t = time_us(*ev.at->literal);
          } catch (const Error& e) {
            lp.fail_at(col, e.what());
          }
          for (const auto& [ch, other, other_line] : fixed_times) {
            if (ch == ev.channel && std::abs(other - t) <= 1e-12 * std::max(1.0, std::abs(t))) {
              lp.fail_at(col, "overlapping events on channel " + std::string(to_string(ch)) +
                                  " (also at line " + std::to_string(other_line) + ")");
            }
          }
          fixed_times.emplace_back(ev.channel, t, line_no);
        }
      }
    };

    if (kw == "program") {
      prog.name = lp.identifier("program name");
    } else if (kw == "isotope") {
      const Token t = lp.next("isotope");
      try {
        prog.isotope = parse_isotope(t.text);
      } catch (const Error&) {
        lp.fail_at(t.column, "unknown isotope '" + t.text + "'");
      }
    } else if (kw == "guard") {
      const int col = lp.column();
      prog.guard = lp.quantity("guard time");
      try {
        if (time_us(*prog.guard) < 0) lp.fail_at(col, "guard must be >= 0");
      } catch (const ParseError&) {
        throw;
      } catch (const Error& e) {
        lp.fail_at(col, e.what());
      }
    } else if (kw == "amplitude") {
      const int col = lp.column();
      AmplitudeDecl a;
      a.id = lp.identifier("amplitude name");
      if (prog.find_amplitude(a.id)) lp.fail_at(col, "duplicate amplitude '" + a.id + "'");
      const int qcol = lp.column();
      a.value = lp.quantity("amplitude");
      try {
        if (tesla(a.value) < 0) lp.fail_at(qcol, "amplitude must be >= 0");
      } catch (const ParseError&) {
        throw;
      } catch (const Error& e) {
        lp.fail_at(qcol, e.what());
      }
      prog.amplitudes.push_back(a);
    } else if (kw == "transition") {
      const int col = lp.column();
      TransitionDecl t;
      t.id = lp.identifier("transition name");
      if (prog.find_transition(t.id)) lp.fail_at(col, "duplicate transition '" + t.id + "'");
      const Token kind = lp.next("'nuclear' or 'electron'");
      if (kind.text == "nuclear") {
        t.kind = TransitionKind::Nuclear;
      } else if (kind.text == "electron") {
        t.kind = TransitionKind::Electron;
      } else {
        lp.fail_at(kind.column, "expected 'nuclear' or 'electron'");
      }
      const std::string prefix = t.kind == TransitionKind::Nuclear ? "ms=" : "mi=";
      const Token spec = lp.next(prefix.c_str());
      if (spec.text.rfind(prefix, 0) != 0) lp.fail_at(spec.column, "expected '" + prefix + "<m>'");
      auto projection = [&](const Token& tok, std::string_view s) {
        try {
          return parse_projection(s);
        } catch (const Error&) {
          lp.fail_at(tok.column, "invalid spin projection '" + std::string(s) + "'");
        }
      };
      t.spectator = projection(spec, std::string_view(spec.text).substr(3));
      const Token from = lp.next("initial projection");
      t.from = projection(from, from.text);
      const Token to = lp.next("final projection");
      t.to = projection(to, to.text);
      if (std::abs(t.from.twice - t.to.twice) != 2) {
        lp.fail_at(to.column, "transition must connect adjacent projections");
      }
      if (lp.peek_is("in")) {
        lp.next("in");
        const Token c = lp.next("charge state");
        try {
          t.charge = parse_charge_state(c.text);
        } catch (const Error&) {
          lp.fail_at(c.column, "unknown charge state '" + c.text + "'");
        }
      }
      prog.transitions.push_back(t);
    } else if (kw == "sweep") {
      const int col = lp.column();
      SweepDecl s;
      s.name = lp.identifier("sweep variable");
      if (prog.find_sweep(s.name)) lp.fail_at(col, "duplicate sweep variable '" + s.name + "'");
      lp.expect("in");
      lp.expect("[");
      std::vector<int> cols;
      while (true) {
        cols.push_back(lp.column());
        s.values.push_back(lp.quantity("sweep value", true));
        if (lp.peek_is(",")) {
          lp.next(",");
          continue;
        }
        lp.expect("]");
        break;
      }
      if (!lp.done()) {
        const Token u = lp.next("unit");
        if (!is_unit(u.text)) lp.fail_at(u.column, "unknown unit '" + u.text + "'");
        for (auto& v : s.values) {
          if (v.unit.empty()) v.unit = u.text;
        }
      }
      for (std::size_t k = 0; k < s.values.size(); ++k) {
        if (s.values[k].unit.empty()) lp.fail_at(cols[k], "missing unit for sweep value");
      }
      prog.sweeps.push_back(s);
    } else if (kw == "laser") {
      Event ev;
      ev.kind = EventKind::LaserInit;
      ev.channel = Channel::Laser;
      ev.line = line_no;
      lp.expect("init");
      parse_at(ev);
      prog.events.push_back(ev);
    } else if (kw == "readout") {
      Event ev;
      ev.kind = EventKind::Readout;
      ev.channel = Channel::Laser;
      ev.line = line_no;
      lp.expect("nuclear");
      parse_at(ev);
      prog.events.push_back(ev);
    } else if (kw == "voltage") {
      Event ev;
      ev.kind = EventKind::Voltage;
      ev.channel = Channel::Voltage;
      ev.line = line_no;
      ev.value = lp.value("voltage", var_uses);
      parse_at(ev);
      prog.events.push_back(ev);
    } else if (kw == "wait" || kw == "evolve") {
      Event ev;
      ev.kind = kw == "wait" ? EventKind::Wait : EventKind::Evolve;
      ev.channel = Channel::Voltage;  // unused for waits
      ev.line = line_no;
      ev.value = lp.value("duration", var_uses);
      prog.events.push_back(ev);
    } else if (kw == "rf" || kw == "mw") {
      Event ev;
      ev.kind = EventKind::Pulse;
      ev.channel = kw == "rf" ? Channel::RF : Channel::MW;
      ev.line = line_no;
      if (lp.peek_is("for")) {
        lp.next("for");
        ev.value = lp.value("pulse duration", var_uses);
      } else {
        Token angle = lp.next("pulse angle");
        if (lp.peek_is("deg")) angle.text += lp.next("deg").text;
        try {
          parse_angle(angle.text);
        } catch (const Error& e) {
          lp.fail_at(angle.column, e.what());
        }
        ev.angle = angle.text;
      }
      lp.expect("on");
      const Token target = lp.next("transition name");
      ev.transition = target.text;
      refs.push_back({target.text, line_no, target.column, Reference::Transition});
      while (!lp.done() && !lp.peek_is("at")) {
        const Token opt = lp.next("option");
        if (opt.text == "amplitude") {
          const Token a = lp.next("amplitude name");
          ev.amplitude = a.text;
          refs.push_back({a.text, line_no, a.column, Reference::Amplitude});
        } else if (opt.text == "phase") {
          ev.phase = lp.value("phase", var_uses);
        } else {
          lp.fail_at(opt.column, "unknown pulse option '" + opt.text + "'");
        }
      }
      parse_at(ev);
      prog.events.push_back(ev);
    } else {
      lp.fail_at(head.column, "unknown statement '" + kw + "'");
    }
    lp.finish();
    for (std::size_t k = uses_before; k < var_uses.size(); ++k) {
      refs.push_back({var_uses[k].first, line_no, var_uses[k].second.column, Reference::Variable});
    }
    if (eol == text.size()) break;
  }

  for (const auto& r : refs) {
    switch (r.kind) {
      case Reference::Transition:
        if (!prog.find_transition(r.name)) throw ParseError(r.line, r.column, "unknown transition '" + r.name + "'");
        break;
      case Reference::Amplitude:
        if (!prog.find_amplitude(r.name)) throw ParseError(r.line, r.column, "unknown amplitude '" + r.name + "'");
        break;
      case Reference::Variable:
        if (!prog.find_sweep(r.name)) throw ParseError(r.line, r.column, "unknown sweep variable '$" + r.name + "'");
        break;
    }
  }
  for (const auto& ev : prog.events) {
    if (ev.kind != EventKind::Pulse) continue;
    const TransitionDecl* t = prog.find_transition(ev.transition);
    const bool nuclear = t->kind == TransitionKind::Nuclear;
    if (nuclear != (ev.channel == Channel::RF)) {
      throw ParseError(ev.line, 1, std::string(nuclear ? "nuclear" : "electron") + " transition '" +
                                       t->id + "' must be driven on the " +
                                       (nuclear ? "rf" : "mw") + " channel");
    }
  }
  return prog;
}

std::string print_program(const PulseProgram& prog) {
  std::ostringstream os;
  if (!prog.name.empty()) os << "program " << prog.name << "\n";
  if (prog.isotope) os << "isotope " << to_string(*prog.isotope) << "\n";
  if (prog.guard) os << "guard " << format_quantity(*prog.guard) << "\n";
  for (const auto& a : prog.amplitudes) os << "amplitude " << a.id << " " << format_quantity(a.value) << "\n";
  for (const auto& t : prog.transitions) {
    const bool nuclear = t.kind == TransitionKind::Nuclear;
    os << "transition " << t.id << (nuclear ? " nuclear ms=" : " electron mi=")
       << format_projection(t.spectator) << " " << format_projection(t.from) << " "
       << format_projection(t.to);
    if (t.charge) os << " in " << to_string(*t.charge);
    os << "\n";
  }
  for (const auto& s : prog.sweeps) {
    os << "sweep " << s.name << " in [";
    for (std::size_t k = 0; k < s.values.size(); ++k) {
      os << (k ? ", " : "") << format_quantity(s.values[k]);
    }
    os << "]\n";
  }
  for (const auto& ev : prog.events) {
    switch (ev.kind) {
      case EventKind::LaserInit: os << "laser init"; break;
      case EventKind::Readout: os << "readout nuclear"; break;
      case EventKind::Voltage: os << "voltage " << format_value(ev.value); break;
      case EventKind::Wait: os << "wait " << format_value(ev.value); break;
      case EventKind::Evolve: os << "evolve " << format_value(ev.value); break;
      case EventKind::Pulse:
        os << to_string(ev.channel) << " ";
        if (ev.angle.empty()) os << "for " << format_value(ev.value);
        else os << ev.angle;
        os << " on " << ev.transition;
        if (!ev.amplitude.empty()) os << " amplitude " << ev.amplitude;
        if (ev.phase) os << " phase " << format_value(*ev.phase);
        break;
    }
    if (ev.at) os << " at " << format_value(*ev.at);
    os << "\n";
  }
  return os.str();
}

std::vector<Bindings> expand_sweeps(const PulseProgram& program) {
  std::vector<Bindings> out{Bindings{}};
  for (const auto& s : program.sweeps) {
    std::vector<Bindings> next;
    for (const auto& b : out) {
      for (const auto& v : s.values) {
        Bindings nb = b;
        nb[s.name] = v;
        next.push_back(std::move(nb));
      }
    }
    out = std::move(next);
  }
  return out;
}

namespace {

struct LineResolution {
  double frequency = 0.0;
  double coupling = 0.0;  ///< |<a|V|b>| per tesla
};

LineResolution resolve_transition(const TransitionDecl& t, ChargeState charge, Isotope isotope,
                                  const PhysicalParams& p) {
  const SpinQuantum s = electron_spin(charge);
  const SpinQuantum i = nuclear_spin(isotope);
  auto missing = [&](const std::string& what) {
    throw Error(ErrorCode::Compile, "transition '" + t.id + "' does not exist in NV" +
                                        (charge == ChargeState::Minus ? "-" : charge == ChargeState::Zero ? "0" : "+") +
                                        ": " + what);
  };
  Projection ms;
  Projection mi_from;
  Projection mi_to;
  Projection ms_to;
  if (t.kind == TransitionKind::Nuclear) {
    if (!projection_valid(s, t.spectator)) missing("no electron sector m_S = " + format_projection(t.spectator));
    if (!projection_valid(i, t.from) || !projection_valid(i, t.to)) missing("nuclear projections invalid for this isotope");
    ms = ms_to = t.spectator;
    mi_from = t.from;
    mi_to = t.to;
  } else {
    if (s.twice == 0) missing("no electron spin");
    if (!projection_valid(i, t.spectator)) missing("no nuclear projection m_I = " + format_projection(t.spectator));
    if (!projection_valid(s, t.from) || !projection_valid(s, t.to)) missing("electron projections invalid");
    ms = t.from;
    ms_to = t.to;
    mi_from = mi_to = t.spectator;
  }
  const Eigensystem eig = diagonalize(build_hamiltonian(charge, isotope, p));
  const int a = eigenstate_index(eig, charge, isotope, ms, mi_from);
  const int b = eigenstate_index(eig, charge, isotope, ms_to, mi_to);
  if (a == b) missing("states cannot be resolved");
  const Operator v = eig.vectors.adjoint() * drive_operator(charge, isotope, p) * eig.vectors;
  return {std::abs(eig.values(a) - eig.values(b)), std::abs(v(a, b))};
}

[[noreturn]] void compile_error(const Event& ev, const std::string& msg) {
  throw Error(ErrorCode::Compile, "line " + std::to_string(ev.line) + ": " + msg);
}

}  // namespace

CompiledSchedule compile(const PulseProgram& program, const CompileOptions& options,
                         const Bindings& bindings) {
  options.params.validate();
  options.profile.validate();
  CompiledSchedule out;
  out.name = program.name;
  out.isotope = program.isotope.value_or(options.default_isotope);
  const double guard = program.guard ? time_us(*program.guard) : options.guard;

  auto resolve = [&](const Event& ev, const ValueRef& v) -> Quantity {
    if (v.literal) return *v.literal;
    const auto it = bindings.find(v.variable);
    if (it == bindings.end()) compile_error(ev, "unbound sweep variable $" + v.variable);
    return it->second;
  };
  auto as = [&](const Event& ev, double (*convert)(const Quantity&), const Quantity& q) {
    try {
      return convert(q);
    } catch (const Error& e) {
      compile_error(ev, e.what());
    }
  };

  double cursor = 0.0;
  double voltage = options.start_voltage;
  ChargeDistribution scheduled = steady_state_distribution(voltage, options.profile);
  std::optional<double> last_voltage_set;
  std::map<Channel, double> channel_end;

  auto push = [&](Segment seg) {
    seg.voltage = seg.kind == SegmentKind::VoltageSet ? seg.voltage : voltage;
    out.segments.push_back(seg);
  };

  for (const Event& ev : program.events) {
    const bool has_channel = ev.kind != EventKind::Wait && ev.kind != EventKind::Evolve;
    double start = cursor;
    if (ev.at) {
      start = as(ev, time_us, resolve(ev, *ev.at));
      if (has_channel && start < channel_end[ev.channel] - 1e-9) {
        compile_error(ev, "overlapping events on channel " + std::string(to_string(ev.channel)));
      }
      if (start < cursor - 1e-9) {
        compile_error(ev, "event overlaps the previous event on another channel; concurrent "
                          "channels are not supported");
      }
      if (start > cursor) {
        Segment gap;
        gap.kind = SegmentKind::RelaxWait;
        gap.start = cursor;
        gap.duration = start - cursor;
        gap.expected = steady_state_distribution(voltage, options.profile);
        push(gap);
      }
    }

    Segment seg;
    seg.start = start;
    seg.expected = steady_state_distribution(voltage, options.profile);
    switch (ev.kind) {
      case EventKind::LaserInit:
        seg.kind = SegmentKind::LaserInit;
        seg.expected = options.illuminated;
        scheduled = options.illuminated;
        break;
      case EventKind::Readout:
        seg.kind = SegmentKind::Readout;
        break;
      case EventKind::Voltage:
        seg.kind = SegmentKind::VoltageSet;
        seg.voltage = as(ev, volts, resolve(ev, ev.value));
        voltage = seg.voltage;
        seg.expected = steady_state_distribution(voltage, options.profile);
        scheduled = seg.expected;
        last_voltage_set = start;
        break;
      case EventKind::Wait:
      case EventKind::Evolve:
        seg.kind = ev.kind == EventKind::Wait ? SegmentKind::RelaxWait : SegmentKind::Unitary;
        seg.duration = as(ev, time_us, resolve(ev, ev.value));
        if (seg.duration < 0) compile_error(ev, "duration must be >= 0");
        break;
      case EventKind::Pulse: {
        seg.kind = SegmentKind::Driven;
        const TransitionDecl* t = program.find_transition(ev.transition);
        if (!t) compile_error(ev, "unknown transition '" + ev.transition + "'");
        DrivePayload d;
        d.channel = ev.channel;
        d.transition = t->id;
        d.kind = t->kind;
        d.charge = t->charge.value_or(scheduled.most_likely());
        d.spectator = t->spectator;
        d.from = t->from;
        d.to = t->to;
        LineResolution line;
        try {
          line = resolve_transition(*t, d.charge, out.isotope, options.params);
        } catch (const Error& e) {
          compile_error(ev, e.what());
        }
        d.frequency = line.frequency;
        if (!ev.amplitude.empty()) {
          d.amplitude = as(ev, tesla, program.find_amplitude(ev.amplitude)->value);
        } else {
          d.amplitude = ev.channel == Channel::RF ? options.rf_amplitude : options.mw_amplitude;
        }
        d.phase = ev.phase ? as(ev, degrees_to_radians, resolve(ev, *ev.phase)) : 0.0;
        d.rabi_frequency = d.amplitude * line.coupling;
        if (ev.angle.empty()) {
          seg.duration = as(ev, time_us, resolve(ev, ev.value));
          if (seg.duration < 0) compile_error(ev, "duration must be >= 0");
        } else {
          d.angle = parse_angle(ev.angle);
          if (d.angle > 0 && !(d.rabi_frequency > 0)) {
            compile_error(ev, "pulse on '" + t->id + "' has zero Rabi frequency");
          }
          seg.duration = d.angle > 0 ? d.angle / (kTwoPi * d.rabi_frequency) : 0.0;
        }
        if (last_voltage_set && start - *last_voltage_set < guard - 1e-9) {
          std::ostringstream os;
          os << to_string(ev.channel) << " pulse starts " << format_number(start - *last_voltage_set)
             << " us after the voltage change; the settle guard is " << format_number(guard) << " us";
          compile_error(ev, os.str());
        }
        const double weight = scheduled.weight(d.charge);
        if (weight < 0.5) {
          std::ostringstream os;
          os << "line " << ev.line << ": pulse on '" << t->id << "' addresses NV"
             << (d.charge == ChargeState::Minus ? "-" : d.charge == ChargeState::Zero ? "0" : "+")
             << " whose expected weight at " << format_number(voltage) << " V is "
             << format_number(std::round(weight * 1e4) / 1e4);
          out.warnings.push_back(os.str());
        }
        seg.drive = d;
        break;
      }
    }
    push(seg);
    cursor = start + seg.duration;
    if (has_channel) channel_end[ev.channel] = cursor;
  }
  out.total_duration = cursor;
  return out;
}

std::string schedule_to_json(const CompiledSchedule& schedule) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["name"] = schedule.name;
  j["isotope"] = std::string(to_string(schedule.isotope));
  j["total_duration_us"] = schedule.total_duration;
  ordered_json segs = ordered_json::array();
  for (const auto& s : schedule.segments) {
    ordered_json js;
    js["kind"] = std::string(to_string(s.kind));
    js["start_us"] = s.start;
    js["duration_us"] = s.duration;
    js["voltage_v"] = s.voltage;
    js["expected"] = {{"w_minus", s.expected.w_minus},
                      {"w_zero", s.expected.w_zero},
                      {"w_plus", s.expected.w_plus}};
    if (s.drive) {
      const auto& d = *s.drive;
      js["drive"] = {{"channel", std::string(to_string(d.channel))},
                     {"transition", d.transition},
                     {"charge", std::string(to_string(d.charge))},
                     {"from", format_projection(d.from)},
                     {"to", format_projection(d.to)},
                     {"frequency_mhz", d.frequency},
                     {"amplitude_t", d.amplitude},
                     {"phase_rad", d.phase},
                     {"rabi_frequency_mhz", d.rabi_frequency},
                     {"angle_rad", d.angle}};
    }
    segs.push_back(js);
  }
  j["segments"] = segs;
  j["warnings"] = schedule.warnings;
  return j.dump(2);
}

namespace {

constexpr std::string_view kChargeProbe = R"(# Charge-state probe: a nuclear pi pulse that only acts in the charge
# state present during the voltage window U.
program charge-probe
isotope n15
guard 2 ms
amplitude b1 5 mT
transition probe nuclear ms=0 +1/2 -1/2 in minus
transition probe0 nuclear ms=-1/2 +1/2 -1/2 in zero
sweep U in [-8, -6, -4, -2, 0, 2, 4, 6, 8] V
laser init
voltage $U
wait 2 ms
rf pi on probe amplitude b1
voltage -8 V
readout nuclear
)";

constexpr std::string_view kRabi = R"(# Nuclear Rabi oscillation in the charge state selected by U.
program rabi
isotope n15
guard 2 ms
amplitude b1 5 mT
transition nmr nuclear ms=0 +1/2 -1/2
sweep U in [-8, 8] V
sweep T in [0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 110, 120, 130, 140, 150, 160, 170, 180, 190, 200, 210, 220, 230, 240, 250, 260, 270, 280, 290, 300] us
laser init
voltage $U
wait 2 ms
rf for $T on nmr amplitude b1
voltage -8 V
readout nuclear
)";

constexpr std::string_view kSettleScan = R"(# NV+ pi pulse after a variable time T_U at the NV+ voltage.
program settle-scan
isotope n15
guard 0 ms
amplitude b1 5 mT
transition nmr nuclear ms=0 +1/2 -1/2 in plus
sweep TU in [0, 0.1, 0.2, 0.4, 0.6, 0.8, 1, 1.5, 2, 3, 4] ms
laser init
voltage 8 V
wait $TU
rf pi on nmr amplitude b1
voltage -8 V
readout nuclear
)";

constexpr std::string_view kEcho = R"(# Hahn echo on the 14N m_I = +1 <-> 0 transition, stored in NV+.
program echo
isotope n14
guard 2 ms
amplitude b1 5 mT
transition nmr nuclear ms=0 +1 0 in plus
sweep tau in [0, 1, 2, 5, 10, 20] ms
sweep phi in [0, 180] deg
laser init
voltage 10 V
wait 5 ms
rf pi/2 on nmr amplitude b1
wait $tau
rf pi on nmr amplitude b1
wait $tau
rf pi/2 on nmr amplitude b1 phase $phi
voltage -8 V
readout nuclear
)";

constexpr std::string_view kT1 = R"(# Population decay of 14N m_I = +1 while stored in NV+. No pulses in the wait.
program t1
isotope n14
guard 2 ms
sweep T in [0, 50, 100, 200, 400, 800] ms
laser init
voltage 10 V
wait 5 ms
wait $T
voltage -8 V
readout nuclear
)";

const std::map<std::string, std::string_view>& template_sources() {
  static const std::map<std::string, std::string_view> sources{
      {"charge-probe", kChargeProbe}, {"rabi", kRabi}, {"settle-scan", kSettleScan},
      {"echo", kEcho}, {"t1", kT1}};
  return sources;
}

}  // namespace

const std::map<std::string, PulseProgram>& builtin_templates() {
  static const std::map<std::string, PulseProgram> templates = [] {
    std::map<std::string, PulseProgram> out;
    for (const auto& [name, text] : template_sources()) out.emplace(name, parse_program(text));
    return out;
  }();
  return templates;
}

const PulseProgram& builtin_template(const std::string& name) {
  const auto& all = builtin_templates();
  const auto it = all.find(name);
  if (it == all.end()) throw Error(ErrorCode::InvalidArgument, "unknown template '" + name + "'");
  return it->second;
}

std::string_view builtin_template_source(const std::string& name) {
  const auto it = template_sources().find(name);
  if (it == template_sources().end()) throw Error(ErrorCode::InvalidArgument, "unknown template '" + name + "'");
  return it->second;
}

}  // namespace nvsim

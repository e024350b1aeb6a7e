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

#include "nvsim/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace nvsim {

namespace {

[[noreturn]] void config_error(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::Config, path.empty() ? what : path + ": " + what);
}

// Walks one YAML mapping, remembering which keys were consumed so leftovers
// can be reported as unknown.
class Section {
 public:
  Section(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) config_error(path_, "expected a mapping");
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  YAML::Node take(const std::string& key) {
    used_.insert(key);
    if (!node_ || node_.IsNull()) return YAML::Node(YAML::NodeType::Undefined);
    const YAML::Node& view = node_;
    return view[key];
  }

  void number(const std::string& key, double& out) {
    const YAML::Node n = take(key);
    if (!n) return;
    try {
      out = n.as<double>();
    } catch (const YAML::Exception&) {
      config_error(key_path(key), "expected a number");
    }
  }

  // Stored value is `scale * text value`, e.g. milliseconds into microseconds.
  void scaled(const std::string& key, double& out, double scale) {
    double v = out / scale;
    number(key, v);
    out = v * scale;
  }

  void integer(const std::string& key, int& out) {
    const YAML::Node n = take(key);
    if (!n) return;
    try {
      out = n.as<int>();
    } catch (const YAML::Exception&) {
      config_error(key_path(key), "expected an integer");
    }
  }

  void unsigned64(const std::string& key, std::uint64_t& out) {
    const YAML::Node n = take(key);
    if (!n) return;
    try {
      out = n.as<std::uint64_t>();
    } catch (const YAML::Exception&) {
      config_error(key_path(key), "expected a non-negative integer");
    }
  }

  void text(const std::string& key, std::string& out) {
    const YAML::Node n = take(key);
    if (!n) return;
    if (!n.IsScalar()) config_error(key_path(key), "expected a string");
    out = n.as<std::string>();
  }

  void numbers(const std::string& key, std::vector<double>& out, double scale = 1.0) {
    const YAML::Node n = take(key);
    if (!n) return;
    if (!n.IsSequence()) config_error(key_path(key), "expected a list of numbers");
    out.clear();
    for (const auto& item : n) {
      try {
        out.push_back(item.as<double>() * scale);
      } catch (const YAML::Exception&) {
        config_error(key_path(key), "expected a list of numbers");
      }
    }
  }

  template <typename T>
  void parsed(const std::string& key, T& out, const std::function<T(std::string_view)>& parse) {
    std::string s;
    text(key, s);
    if (s.empty()) return;
    try {
      out = parse(s);
    } catch (const Error& e) {
      config_error(key_path(key), e.what());
    }
  }

  Section child(const std::string& key) { return Section(take(key), key_path(key)); }

  void finish() const {
    if (!node_ || node_.IsNull()) return;
    for (const auto& kv : node_) {
      const std::string key = kv.first.as<std::string>();
      if (!used_.count(key)) config_error(key_path(key), "unknown key");
    }
  }

 private:
  YAML::Node node_;
  std::string path_;
  std::set<std::string> used_;
};

ElectronAttachment parse_attachment(std::string_view s) {
  if (s == "mixed") return ElectronAttachment::MaximallyMixed;
  if (s == "ground") return ElectronAttachment::Ground;
  throw Error(ErrorCode::Config, "expected 'mixed' or 'ground', got '" + std::string(s) + "'");
}

std::string_view attachment_name(ElectronAttachment a) {
  return a == ElectronAttachment::Ground ? "ground" : "mixed";
}

void read_nucleus(Section s, NucleusParams& n) {
  s.number("gamma_n_mhz_per_t", n.gamma_n);
  s.number("a_par_mhz", n.a_par);
  s.number("a_perp_mhz", n.a_perp);
  s.number("a_zero_mhz", n.a_zero);
  s.finish();
}

void read_relaxation(Section s, RelaxationParams& r) {
  s.scaled("t1_n_ms", r.t1_n, kMicrosecondsPerMillisecond);
  s.scaled("t2_n_ms", r.t2_n, kMicrosecondsPerMillisecond);
  s.scaled("t1_e_ms", r.t1_e, kMicrosecondsPerMillisecond);
  s.scaled("rabi_decay_ms", r.rabi_decay, kMicrosecondsPerMillisecond);
  s.finish();
}

void apply(const YAML::Node& root, Config& c) {
  Section top(root, "");
  top.unsigned64("seed", c.seed);
  top.text("output_dir", c.output_dir);

  {
    Section s = top.child("physics");
    s.number("zero_field_splitting_mhz", c.params.zero_field_splitting);
    s.number("gamma_e_mhz_per_t", c.params.gamma_e);
    s.scaled("b_z_mt", c.params.b_z, 1e-3);
    read_nucleus(s.child("n14"), c.params.n14);
    read_nucleus(s.child("n15"), c.params.n15);
    Section q = s.child("quadrupole_mhz");
    q.number("minus", c.params.q_minus);
    q.number("zero", c.params.q_zero);
    q.number("plus", c.params.q_plus);
    q.finish();
    s.finish();
  }
  {
    Section s = top.child("relaxation");
    read_relaxation(s.child("minus"), c.relaxation.minus);
    read_relaxation(s.child("zero"), c.relaxation.zero);
    read_relaxation(s.child("plus"), c.relaxation.plus);
    s.finish();
  }
  {
    Section s = top.child("charge");
    s.number("v_minus_zero_v", c.profile.v_minus_zero);
    s.number("v_zero_plus_v", c.profile.v_zero_plus);
    s.number("width1_v", c.profile.width1);
    s.number("width2_v", c.profile.width2);
    s.number("w_minus_max", c.profile.w_minus_max);
    s.number("w_plus_max", c.profile.w_plus_max);
    s.number("w_minus_high_v", c.profile.w_minus_high_v);
    s.scaled("settle_tau_ms", c.profile.settle_tau, kMicrosecondsPerMillisecond);
    s.parsed<ElectronAttachment>("attachment", c.attachment, parse_attachment);
    s.finish();
  }
  {
    Section s = top.child("readout");
    s.number("baseline", c.readout.baseline);
    s.number("contrast", c.readout.contrast);
    s.number("rate_minus_per_s", c.readout.rate_minus);
    s.number("rate_zero_ratio", c.readout.rate_zero_ratio);
    s.number("illuminated_minus", c.readout.illuminated_minus);
    s.number("init_depolarization", c.readout.init_depolarization);
    s.integer("shots", c.readout.shots);
    s.finish();
  }
  {
    Section s = top.child("sequence");
    s.scaled("guard_ms", c.guard, kMicrosecondsPerMillisecond);
    s.scaled("rf_amplitude_mt", c.rf_amplitude, 1e-3);
    s.scaled("mw_amplitude_mt", c.mw_amplitude, 1e-3);
    s.number("start_voltage_v", c.start_voltage);
    s.number("selectivity_window_mhz", c.selectivity_window);
    s.number("detuning_window_mhz", c.detuning_window);
    s.finish();
  }
  {
    Section s = top.child("experiments");
    s.numbers("scan_voltages_v", c.scan_voltages);
    Section sp = s.child("spectroscopy");
    sp.parsed<Isotope>("isotope", c.spectroscopy.isotope, parse_isotope);
    sp.number("linewidth_mhz", c.spectroscopy.linewidth);
    sp.number("step_mhz", c.spectroscopy.step);
    sp.number("min_mhz", c.spectroscopy.f_min);
    sp.number("max_mhz", c.spectroscopy.f_max);
    sp.scaled("rf_amplitude_mt", c.spectroscopy.rf_amplitude, 1e-3);
    sp.finish();
    Section lt = s.child("lifetimes");
    lt.scaled("rabi_amplitude_mt", c.lifetimes.rabi_amplitude, 1e-3);
    lt.scaled("rabi_step_ms", c.lifetimes.rabi_step, kMicrosecondsPerMillisecond);
    lt.scaled("rabi_span_ms", c.lifetimes.rabi_span, kMicrosecondsPerMillisecond);
    lt.numbers("minus_echo_taus_ms", c.lifetimes.minus_echo_taus, kMicrosecondsPerMillisecond);
    lt.finish();
    s.finish();
  }
  {
    Section s = top.child("register");
    s.number("k_dd", c.reg.k_dd);
    s.number("swap_error", c.reg.swap_error);
    s.parsed<ElectronAttachment>("dark_attachment", c.reg.dark_attachment, parse_attachment);
    s.finish();
  }
  top.finish();
}

}  // namespace

void Config::validate() const {
  try {
    params.validate();
    profile.validate();
    readout.validate();
    const int d14 = nuclear_spin(Isotope::N14).multiplicity();
    for (ChargeState c : kAllChargeStates) relaxation.get(c).validate(d14);
  } catch (const Error& e) {
    throw Error(ErrorCode::Config, e.what());
  }
  auto bad = [](const std::string& msg) { throw Error(ErrorCode::Config, msg); };
  if (!(guard >= 0)) bad("sequence.guard_ms must be >= 0");
  if (!(rf_amplitude > 0) || !(mw_amplitude > 0)) bad("sequence amplitudes must be > 0");
  if (!std::isfinite(start_voltage)) bad("sequence.start_voltage_v must be finite");
  if (!(selectivity_window > 0) || !(detuning_window > 0)) bad("sequence windows must be > 0");
  if (scan_voltages.empty()) bad("experiments.scan_voltages_v must not be empty");
  const auto& sp = spectroscopy;
  if (!(sp.linewidth > 0) || !(sp.step > 0) || !(sp.f_min > 0) || !(sp.f_max > sp.f_min) ||
      !(sp.rf_amplitude > 0)) {
    bad("experiments.spectroscopy: need linewidth, step, rf amplitude > 0 and 0 < min < max");
  }
  if ((sp.f_max - sp.f_min) / sp.step > 1e6) bad("experiments.spectroscopy: too many sweep points");
  const auto& lt = lifetimes;
  if (!(lt.rabi_amplitude > 0) || !(lt.rabi_step > 0) || !(lt.rabi_span > lt.rabi_step)) {
    bad("experiments.lifetimes: rabi amplitude/step must be > 0 and span > step");
  }
  if (lt.minus_echo_taus.size() < 6) bad("experiments.lifetimes.minus_echo_taus_ms needs >= 6 values");
  if (!(reg.k_dd > 0)) bad("register.k_dd must be > 0");
  if (!(reg.swap_error >= 0 && reg.swap_error <= 1)) bad("register.swap_error must lie in [0, 1]");
}

CompileOptions Config::compile_options() const {
  CompileOptions o;
  o.params = params;
  o.profile = profile;
  o.illuminated = readout.illuminated();
  o.guard = guard;
  o.rf_amplitude = rf_amplitude;
  o.mw_amplitude = mw_amplitude;
  o.start_voltage = start_voltage;
  return o;
}

ExecutorOptions Config::executor_options(GateModel gate) const {
  ExecutorOptions o;
  o.params = params;
  o.relaxation = relaxation;
  o.profile = profile;
  o.readout = readout;
  o.gate = gate;
  o.selectivity_window = selectivity_window;
  o.detuning_window = detuning_window;
  o.attachment = attachment;
  o.start_voltage = start_voltage;
  return o;
}

Config default_config() {
  Config c;
  c.relaxation.minus.t1_n = 60.0 * kMicrosecondsPerSecond;
  c.relaxation.minus.t2_n = 1.25 * kMicrosecondsPerMillisecond;
  c.relaxation.zero.t1_n = 60.0 * kMicrosecondsPerSecond;
  c.relaxation.zero.t2_n = 1.0 * kMicrosecondsPerMillisecond;
  c.relaxation.plus.t1_n = 300.0 * kMicrosecondsPerMillisecond;
  c.relaxation.plus.t2_n = 25.0 * kMicrosecondsPerMillisecond;
  c.relaxation.plus.rabi_decay = 22.0 * kMicrosecondsPerMillisecond;
  for (int v = -8; v <= 10; ++v) c.scan_voltages.push_back(v);
  return c;
}

Config parse_config(std::string_view yaml) {
  Config c = default_config();
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml));
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::Config, std::string("YAML syntax: ") + e.what());
  }
  if (root && !root.IsNull()) {
    if (!root.IsMap()) throw Error(ErrorCode::Config, "config root must be a mapping");
    apply(root, c);
  }
  c.validate();
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

std::string dump_config(const Config& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(15);  // DBL_DIG keeps text -> double -> text stable
  auto ms = [](double us) { return us / kMicrosecondsPerMillisecond; };
  auto nucleus = [&](const char* key, const NucleusParams& n) {
    out << YAML::Key << key << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "gamma_n_mhz_per_t" << YAML::Value << n.gamma_n;
    out << YAML::Key << "a_par_mhz" << YAML::Value << n.a_par;
    out << YAML::Key << "a_perp_mhz" << YAML::Value << n.a_perp;
    out << YAML::Key << "a_zero_mhz" << YAML::Value << n.a_zero;
    out << YAML::EndMap;
  };
  auto relax = [&](const char* key, const RelaxationParams& r) {
    out << YAML::Key << key << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "t1_n_ms" << YAML::Value << ms(r.t1_n);
    out << YAML::Key << "t2_n_ms" << YAML::Value << ms(r.t2_n);
    out << YAML::Key << "t1_e_ms" << YAML::Value << ms(r.t1_e);
    out << YAML::Key << "rabi_decay_ms" << YAML::Value << ms(r.rabi_decay);
    out << YAML::EndMap;
  };

  out << YAML::BeginMap;
  out << YAML::Key << "seed" << YAML::Value << c.seed;
  out << YAML::Key << "output_dir" << YAML::Value << c.output_dir;

  out << YAML::Key << "physics" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "zero_field_splitting_mhz" << YAML::Value << c.params.zero_field_splitting;
  out << YAML::Key << "gamma_e_mhz_per_t" << YAML::Value << c.params.gamma_e;
  out << YAML::Key << "b_z_mt" << YAML::Value << c.params.b_z * 1e3;
  nucleus("n14", c.params.n14);
  nucleus("n15", c.params.n15);
  out << YAML::Key << "quadrupole_mhz" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "minus" << YAML::Value << c.params.q_minus;
  out << YAML::Key << "zero" << YAML::Value << c.params.q_zero;
  out << YAML::Key << "plus" << YAML::Value << c.params.q_plus;
  out << YAML::EndMap << YAML::EndMap;

  out << YAML::Key << "relaxation" << YAML::Value << YAML::BeginMap;
  relax("minus", c.relaxation.minus);
  relax("zero", c.relaxation.zero);
  relax("plus", c.relaxation.plus);
  out << YAML::EndMap;

  out << YAML::Key << "charge" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "v_minus_zero_v" << YAML::Value << c.profile.v_minus_zero;
  out << YAML::Key << "v_zero_plus_v" << YAML::Value << c.profile.v_zero_plus;
  out << YAML::Key << "width1_v" << YAML::Value << c.profile.width1;
  out << YAML::Key << "width2_v" << YAML::Value << c.profile.width2;
  out << YAML::Key << "w_minus_max" << YAML::Value << c.profile.w_minus_max;
  out << YAML::Key << "w_plus_max" << YAML::Value << c.profile.w_plus_max;
  out << YAML::Key << "w_minus_high_v" << YAML::Value << c.profile.w_minus_high_v;
  out << YAML::Key << "settle_tau_ms" << YAML::Value << ms(c.profile.settle_tau);
  out << YAML::Key << "attachment" << YAML::Value << std::string(attachment_name(c.attachment));
  out << YAML::EndMap;

  out << YAML::Key << "readout" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "baseline" << YAML::Value << c.readout.baseline;
  out << YAML::Key << "contrast" << YAML::Value << c.readout.contrast;
  out << YAML::Key << "rate_minus_per_s" << YAML::Value << c.readout.rate_minus;
  out << YAML::Key << "rate_zero_ratio" << YAML::Value << c.readout.rate_zero_ratio;
  out << YAML::Key << "illuminated_minus" << YAML::Value << c.readout.illuminated_minus;
  out << YAML::Key << "init_depolarization" << YAML::Value << c.readout.init_depolarization;
  out << YAML::Key << "shots" << YAML::Value << c.readout.shots;
  out << YAML::EndMap;

  out << YAML::Key << "sequence" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "guard_ms" << YAML::Value << ms(c.guard);
  out << YAML::Key << "rf_amplitude_mt" << YAML::Value << c.rf_amplitude * 1e3;
  out << YAML::Key << "mw_amplitude_mt" << YAML::Value << c.mw_amplitude * 1e3;
  out << YAML::Key << "start_voltage_v" << YAML::Value << c.start_voltage;
  out << YAML::Key << "selectivity_window_mhz" << YAML::Value << c.selectivity_window;
  out << YAML::Key << "detuning_window_mhz" << YAML::Value << c.detuning_window;
  out << YAML::EndMap;

  out << YAML::Key << "experiments" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "scan_voltages_v" << YAML::Value << YAML::Flow << c.scan_voltages;
  out << YAML::Key << "spectroscopy" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "isotope" << YAML::Value << std::string(to_string(c.spectroscopy.isotope));
  out << YAML::Key << "linewidth_mhz" << YAML::Value << c.spectroscopy.linewidth;
  out << YAML::Key << "step_mhz" << YAML::Value << c.spectroscopy.step;
  out << YAML::Key << "min_mhz" << YAML::Value << c.spectroscopy.f_min;
  out << YAML::Key << "max_mhz" << YAML::Value << c.spectroscopy.f_max;
  out << YAML::Key << "rf_amplitude_mt" << YAML::Value << c.spectroscopy.rf_amplitude * 1e3;
  out << YAML::EndMap;
  out << YAML::Key << "lifetimes" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "rabi_amplitude_mt" << YAML::Value << c.lifetimes.rabi_amplitude * 1e3;
  out << YAML::Key << "rabi_step_ms" << YAML::Value << ms(c.lifetimes.rabi_step);
  out << YAML::Key << "rabi_span_ms" << YAML::Value << ms(c.lifetimes.rabi_span);
  std::vector<double> taus;
  for (double t : c.lifetimes.minus_echo_taus) taus.push_back(ms(t));
  out << YAML::Key << "minus_echo_taus_ms" << YAML::Value << YAML::Flow << taus;
  out << YAML::EndMap << YAML::EndMap;

  out << YAML::Key << "register" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "k_dd" << YAML::Value << c.reg.k_dd;
  out << YAML::Key << "swap_error" << YAML::Value << c.reg.swap_error;
  out << YAML::Key << "dark_attachment" << YAML::Value
      << std::string(attachment_name(c.reg.dark_attachment));
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace nvsim

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

#include "nvsim/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <yaml-cpp/yaml.h>

#include "json.hpp"
#include "nvsim/selftest.hpp"

namespace nvsim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kReferenceShots = 10000;  // scale for tolerances of exact (shot-free) runs

// Runs fn(i) for i in [0, n) on a small thread pool. Results must be written
// to per-index slots so the outcome does not depend on scheduling.
template <typename F>
void parallel_for(std::size_t n, F&& fn) {
  const std::size_t threads =
      std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

PulseProgram with_sweep(PulseProgram program, const std::string& name, const std::vector<double>& values,
                        const std::string& unit) {
  for (auto& s : program.sweeps) {
    if (s.name != name) continue;
    s.values.clear();
    for (double v : values) s.values.push_back(Quantity{v, unit});
    return program;
  }
  throw Error(ErrorCode::InvalidArgument, "program has no sweep named '" + name + "'");
}

PulseProgram with_amplitude(PulseProgram program, const std::string& id, double tesla_value) {
  for (auto& a : program.amplitudes) {
    if (a.id == id) {
      a.value = Quantity{tesla_value * 1e3, "mT"};
      return program;
    }
  }
  throw Error(ErrorCode::InvalidArgument, "program has no amplitude named '" + id + "'");
}

struct PointRun {
  Bindings bindings;
  CompiledSchedule schedule;
  EnsembleResult result;
};

std::vector<PointRun> run_points(const Config& config, const PulseProgram& program, GateModel gate) {
  const auto bindings = expand_sweeps(program);
  std::vector<PointRun> runs(bindings.size());
  const Isotope isotope = program.isotope.value_or(Isotope::N15);
  const Executor executor(config.executor_options(gate), isotope);
  const CompileOptions copt = config.compile_options();
  parallel_for(bindings.size(), [&](std::size_t i) {
    runs[i].bindings = bindings[i];
    runs[i].schedule = compile(program, copt, bindings[i]);
    runs[i].result = executor.run(runs[i].schedule);
  });
  return runs;
}

void collect_warnings(const std::vector<PointRun>& runs, std::vector<std::string>& out) {
  std::set<std::string> seen(out.begin(), out.end());
  for (const auto& r : runs) {
    for (const auto& w : r.schedule.warnings) {
      if (seen.insert(w).second) out.push_back(w);
    }
  }
}

double flip_of(const PointRun& run) {
  if (run.result.readouts.empty()) throw Error(ErrorCode::InvalidArgument, "program has no readout");
  return run.result.readouts.front().flip_probability;
}

// Observable built from independently sampled flip probabilities.
struct Term {
  double coef = 1.0;
  double p = 0.0;
};

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<std::vector<Term>> points;
};

struct Sampled {
  std::vector<double> y;
  std::vector<double> err;
  std::vector<double> exact;
};

Sampled sample_series(const Series& s, const ReadoutModel& model, int shots, std::uint64_t seed) {
  Sampled out;
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    double y = 0.0, var = 0.0, exact = 0.0;
    for (std::size_t j = 0; j < s.points[i].size(); ++j) {
      const Term& t = s.points[i][j];
      exact += t.coef * t.p;
      if (shots <= 0) {
        y += t.coef * t.p;
        continue;
      }
      Rng rng(derive_seed(seed, s.name, i * 16 + j));
      const ShotEstimate e = sample_shots(t.p, model, static_cast<std::uint64_t>(shots), rng);
      y += t.coef * e.flip;
      var += t.coef * t.coef * e.flip_stderr * e.flip_stderr;
    }
    out.y.push_back(y);
    out.err.push_back(std::sqrt(var));
    out.exact.push_back(exact);
  }
  return out;
}

void append_series(Table& table, const Series& s, const Sampled& d) {
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    table.rows.push_back({s.name, s.x[i], d.y[i], d.err[i], d.exact[i]});
  }
}

bool is_flat(const std::vector<double>& y) {
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  return *hi - *lo <= 1e-9;
}

Reported no_decay(const std::string& name, const std::string& unit) {
  Reported r;
  r.name = name;
  r.unit = unit;
  r.value = std::numeric_limits<double>::infinity();
  r.error = kNaN;
  r.ci_low = kNaN;
  r.ci_high = kNaN;
  r.note = "no decay";
  return r;
}

// Fits a decay model to a series and reports 1/rate.
Reported fit_decay(const std::string& name, const std::vector<double>& x, const std::vector<double>& y,
                   FitModel model, FitResult* fit_out = nullptr) {
  if (is_flat(y)) return no_decay(name, "ms");
  const FitResult fit = fit_curve(x, y, model);
  if (fit_out) *fit_out = fit;
  const int rate_index = 2;
  return decay_time(name, fit, rate_index, "ms", 1.0);
}

// Four significant digits for human-readable details.
std::string brief(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

Check relative_check(const std::string& name, double value, double target, double tolerance) {
  Check c;
  c.name = name;
  c.value = value;
  c.target = target;
  c.tolerance = tolerance;
  c.passed = std::isfinite(value) && std::abs(value / target - 1.0) <= tolerance;
  c.detail = "relative deviation " + brief(value / target - 1.0);
  return c;
}

Check interval_check(const std::string& name, const Reported& r, double target) {
  Check c;
  c.name = name;
  c.value = r.value;
  c.target = target;
  c.tolerance = kNaN;
  c.passed = r.ci_low <= target && target <= r.ci_high;
  c.detail = "95% interval [" + brief(r.ci_low) + ", " + brief(r.ci_high) + "]";
  return c;
}

// Lifetime checks: 2% when exact, generating value inside the 95% interval otherwise.
Check lifetime_check(const std::string& name, const Reported& r, double target, int shots) {
  return shots <= 0 ? relative_check(name, r.value, target, 0.02) : interval_check(name, r, target);
}

double binomial_sigma(double p, const ReadoutModel& model, int shots) {
  const double q = std::clamp(model.baseline + model.contrast * p, 0.0, 1.0);
  return std::sqrt(q * (1.0 - q) / shots) / model.contrast;
}

Series settle_series(const Config& config, const std::vector<double>& t_u) {
  PulseProgram prog = builtin_template("settle-scan");
  if (!t_u.empty()) prog = with_sweep(prog, "TU", t_u, "us");
  const auto runs = run_points(config, prog, GateModel::Physical);
  Series s;
  s.name = "settle";
  for (const auto& r : runs) {
    s.x.push_back(time_us(r.bindings.at("TU")) / kMicrosecondsPerMillisecond);
    s.points.push_back({{1.0, flip_of(r)}});
  }
  return s;
}

Series echo_plus_series(const Config& config) {
  const auto runs = run_points(config, builtin_template("echo"), GateModel::Physical);
  std::map<double, std::pair<double, double>> by_tau;  // tau -> (p(0), p(pi))
  for (const auto& r : runs) {
    const double tau = time_us(r.bindings.at("tau"));
    const bool inverted = std::abs(degrees_to_radians(r.bindings.at("phi"))) > 1e-9;
    (inverted ? by_tau[tau].second : by_tau[tau].first) = flip_of(r);
  }
  Series s;
  s.name = "echo-plus";
  const auto& first = by_tau.begin()->second;
  const double sign = first.second >= first.first ? 1.0 : -1.0;
  for (const auto& [tau, p] : by_tau) {
    s.x.push_back(2.0 * tau / kMicrosecondsPerMillisecond);
    s.points.push_back({{sign, p.second}, {-sign, p.first}});
  }
  return s;
}

Series echo_minus_series(const Config& config) {
  SpinSetup setup{ChargeState::Minus, Isotope::N14, Projection{0}, Projection{2}};
  const Trace tr = simulate_echo(setup, config.params, config.relaxation.minus, config.rf_amplitude,
                                 config.lifetimes.minus_echo_taus);
  Series s;
  s.name = "echo-minus";
  for (std::size_t i = 0; i < tr.x.size(); ++i) {
    const double y = tr.y[i];
    s.x.push_back(tr.x[i] / kMicrosecondsPerMillisecond);
    // Ideal echo on a pure state: p(0), p(pi) = (1 +- y) / 2.
    s.points.push_back({{1.0, 0.5 * (1.0 + y)}, {-1.0, 0.5 * (1.0 - y)}});
  }
  return s;
}

Series t1_series(const Config& config) {
  const auto runs = run_points(config, builtin_template("t1"), GateModel::Physical);
  Series s;
  s.name = "t1-plus";
  for (const auto& r : runs) {
    s.x.push_back(time_us(r.bindings.at("T")) / kMicrosecondsPerMillisecond);
    s.points.push_back({{1.0, flip_of(r)}});
  }
  return s;
}

Series long_rabi_series(const Config& config) {
  const auto& lt = config.lifetimes;
  std::vector<double> durations;
  const int n = static_cast<int>(std::floor(lt.rabi_span / lt.rabi_step + 1e-9));
  for (int i = 0; i <= n; ++i) durations.push_back(i * lt.rabi_step);
  PulseProgram prog = builtin_template("rabi");
  prog = with_sweep(prog, "U", {10.0}, "V");
  prog = with_sweep(prog, "T", durations, "us");
  prog = with_amplitude(prog, "b1", lt.rabi_amplitude);
  const auto runs = run_points(config, prog, GateModel::Physical);
  Series s;
  s.name = "rabi-plus";
  for (const auto& r : runs) {
    s.x.push_back(time_us(r.bindings.at("T")) / kMicrosecondsPerMillisecond);
    s.points.push_back({{1.0, flip_of(r)}});
  }
  return s;
}

Table series_table() { return Table{{"series", "x_ms", "value", "stderr", "exact"}, {}}; }

}  // namespace

bool ExperimentResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

const Reported* ExperimentResult::find(const std::string& n) const {
  for (const auto& r : reported) {
    if (r.name == n) return &r;
  }
  return nullptr;
}

const Check* ExperimentResult::find_check(const std::string& n) const {
  for (const auto& c : checks) {
    if (c.name == n) return &c;
  }
  return nullptr;
}

std::string to_csv(const Table& table) {
  auto field = [](const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
      if (ch == '"') q += '"';
      q += ch;
    }
    return q + "\"";
  };
  std::ostringstream os;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) os << ',';
    os << field(table.columns[i]);
  }
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      if (const double* d = std::get_if<double>(&row[i])) {
        os << format_number(*d);
      } else {
        os << field(std::get<std::string>(row[i]));
      }
    }
    os << '\n';
  }
  return os.str();
}

std::string to_json(const ExperimentResult& result) {
  using json = nlohmann::ordered_json;
  auto num = [](double v) -> json {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return nullptr;
    return v > 0 ? "inf" : "-inf";
  };
  json j;
  j["name"] = result.name;
  j["seed"] = result.seed;
  j["shots"] = result.shots;
  json reported = json::array();
  for (const auto& r : result.reported) {
    json o;
    o["name"] = r.name;
    o["unit"] = r.unit;
    o["value"] = num(r.value);
    o["error"] = num(r.error);
    o["ci95"] = json::array({num(r.ci_low), num(r.ci_high)});
    if (!r.note.empty()) o["note"] = r.note;
    reported.push_back(o);
  }
  j["reported"] = reported;
  json checks = json::array();
  for (const auto& c : result.checks) {
    json o;
    o["name"] = c.name;
    o["passed"] = c.passed;
    o["value"] = num(c.value);
    o["target"] = num(c.target);
    o["tolerance"] = num(c.tolerance);
    o["detail"] = c.detail;
    checks.push_back(o);
  }
  j["checks"] = checks;
  j["passed"] = result.passed();
  j["notes"] = result.notes;
  j["warnings"] = result.warnings;
  json rows = json::array();
  for (const auto& row : result.table.rows) {
    json o;
    for (std::size_t i = 0; i < row.size() && i < result.table.columns.size(); ++i) {
      if (const double* d = std::get_if<double>(&row[i])) {
        o[result.table.columns[i]] = num(*d);
      } else {
        o[result.table.columns[i]] = std::get<std::string>(row[i]);
      }
    }
    rows.push_back(o);
  }
  j["table"] = rows;
  return j.dump(2) + "\n";
}

Reported decay_time(const std::string& name, const FitResult& fit, int rate_index,
                    const std::string& unit, double scale) {
  const double k = fit.params.at(rate_index);
  if (!(k > 1e-12)) return no_decay(name, unit);
  Reported r;
  r.name = name;
  r.unit = unit;
  r.value = scale / k;
  r.error = scale * fit.errors[rate_index] / (k * k);
  const double k_hi = fit.ci_high[rate_index];
  const double k_lo = fit.ci_low[rate_index];
  r.ci_low = k_hi > 0 ? scale / k_hi : kNaN;
  r.ci_high = k_lo > 0 ? scale / k_lo : std::numeric_limits<double>::infinity();
  if (!fit.converged) r.note = fit.message;
  return r;
}

ExperimentResult run_charge_scan(const Config& config, const std::vector<double>& voltages, int shots) {
  if (voltages.empty()) throw Error(ErrorCode::InvalidArgument, "charge scan needs at least one voltage");
  ExperimentResult out;
  out.name = "scan-charge";
  out.seed = config.seed;
  out.shots = shots;
  const PulseProgram probe = with_sweep(builtin_template("charge-probe"), "U", voltages, "V");
  PulseProgram probe0 = probe;
  for (auto& ev : probe0.events) {
    if (ev.kind == EventKind::Pulse && ev.transition == "probe") ev.transition = "probe0";
  }
  const auto pm = run_points(config, probe, GateModel::IdealSelective);
  const auto p0 = run_points(config, probe0, GateModel::IdealSelective);
  collect_warnings(pm, out.warnings);
  collect_warnings(p0, out.warnings);

  Series s_pm{"w-pm", {}, {}}, s_0{"w-zero", {}, {}};
  for (std::size_t i = 0; i < pm.size(); ++i) {
    const double v = volts(pm[i].bindings.at("U"));
    s_pm.x.push_back(v);
    s_0.x.push_back(v);
    s_pm.points.push_back({{1.0, flip_of(pm[i])}});
    s_0.points.push_back({{1.0, flip_of(p0[i])}});
  }
  const Sampled d_pm = sample_series(s_pm, config.readout, shots, config.seed);
  const Sampled d_0 = sample_series(s_0, config.readout, shots, config.seed);

  out.table.columns = {"voltage_V", "w_pm",     "w_pm_stderr", "w_pm_exact", "w_zero",
                       "w_zero_stderr", "w_zero_exact", "ss_minus", "ss_zero", "ss_plus"};
  const int ref_shots = shots > 0 ? shots : kReferenceShots;
  bool sum_ok = true;
  double worst_sum = 0.0;
  for (std::size_t i = 0; i < s_pm.x.size(); ++i) {
    const ChargeDistribution ss = steady_state_distribution(s_pm.x[i], config.profile);
    out.table.rows.push_back({s_pm.x[i], d_pm.y[i], d_pm.err[i], d_pm.exact[i], d_0.y[i], d_0.err[i],
                              d_0.exact[i], ss.w_minus, ss.w_zero, ss.w_plus});
    const double sigma = std::hypot(binomial_sigma(d_pm.exact[i], config.readout, ref_shots),
                                    binomial_sigma(d_0.exact[i], config.readout, ref_shots));
    const double excess = d_pm.y[i] + d_0.y[i] - 1.0 - 3.0 * sigma;
    worst_sum = std::max(worst_sum, d_pm.y[i] + d_0.y[i]);
    if (excess > 0) sum_ok = false;
  }

  auto at_voltage = [&](double v) -> int {
    for (std::size_t i = 0; i < s_pm.x.size(); ++i) {
      if (std::abs(s_pm.x[i] - v) < 1e-9) return static_cast<int>(i);
    }
    return -1;
  };
  if (const int i = at_voltage(-8.0); i >= 0) {
    Check c;
    c.name = "w_pm_at_-8V";
    c.value = d_pm.y[i];
    c.target = 0.70;
    c.tolerance = 3.0 * binomial_sigma(0.70, config.readout, ref_shots);
    c.passed = std::abs(c.value - c.target) <= c.tolerance;
    c.detail = "|W+- - 0.70| <= 3 sigma at " + std::to_string(ref_shots) + " shots";
    out.checks.push_back(c);
  }
  if (const int i = at_voltage(8.0); i >= 0) {
    Check c;
    c.name = "w_pm_at_+8V";
    c.value = d_pm.y[i];
    c.target = 0.98;
    c.tolerance = 3.0 * binomial_sigma(0.98, config.readout, ref_shots);
    c.passed = c.value >= c.target - c.tolerance;
    c.detail = "W+- >= 0.98 - 3 sigma at " + std::to_string(ref_shots) + " shots";
    out.checks.push_back(c);
  }
  Check sum;
  sum.name = "w_pm_plus_w_zero_le_1";
  sum.value = worst_sum;
  sum.target = 1.0;
  sum.tolerance = kNaN;
  sum.passed = sum_ok;
  sum.detail = "largest W+- + W0 over the scan, allowed 3 sigma above 1";
  out.checks.push_back(sum);

  if (s_pm.x.size() >= 12) {
    try {
      const FitResult fit = fit_curve(s_pm.x, d_pm.y, FitModel::DoubleSigmoid);
      const auto names = parameter_names(FitModel::DoubleSigmoid);
      for (std::size_t k = 0; k < names.size(); ++k) {
        out.reported.push_back({"w_pm_fit_" + names[k], k == 1 || k == 2 || k == 4 || k == 5 ? "V" : "",
                                fit.params[k], fit.errors[k], fit.ci_low[k], fit.ci_high[k],
                                fit.converged ? "" : fit.message});
      }
    } catch (const Error& e) {
      out.warnings.push_back(std::string("W+- double-sigmoid fit failed: ") + e.what());
    }
  }
  out.notes.push_back("W+- probes the NV- mS=0 nuclear line, which NV+ shares within the selectivity window");
  out.notes.push_back("measured values are inputs to the model; the checks test parameter recovery");
  return out;
}

ExperimentResult run_rabi_comparison(const Config& config, int shots) {
  ExperimentResult out;
  out.name = "rabi";
  out.seed = config.seed;
  out.shots = shots;
  const auto runs = run_points(config, builtin_template("rabi"), GateModel::Physical);
  collect_warnings(runs, out.warnings);

  std::map<double, Series> by_voltage;
  for (const auto& r : runs) {
    const double v = volts(r.bindings.at("U"));
    Series& s = by_voltage[v];
    if (s.name.empty()) {
      s.name = std::string("rabi-") +
               std::string(to_string(steady_state_distribution(v, config.profile).most_likely()));
    }
    s.x.push_back(time_us(r.bindings.at("T")));
    s.points.push_back({{1.0, flip_of(r)}});
  }
  out.table.columns = {"voltage_V", "charge", "duration_us", "flip", "flip_stderr", "flip_exact"};

  struct Fitted {
    double frequency, half_width, amplitude;
  };
  std::map<ChargeState, Fitted> fitted;
  for (const auto& [v, s] : by_voltage) {
    const ChargeState charge = steady_state_distribution(v, config.profile).most_likely();
    const Sampled d = sample_series(s, config.readout, shots, config.seed);
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      out.table.rows.push_back({v, std::string(to_string(charge)), s.x[i], d.y[i], d.err[i], d.exact[i]});
    }
    const FitResult fit = fit_curve(s.x, d.y, FitModel::CosineDecay);
    const std::string tag(to_string(charge));
    out.reported.push_back({"rabi_frequency_" + tag, "MHz", fit.params[3], fit.errors[3], fit.ci_low[3],
                            fit.ci_high[3], fit.converged ? "" : fit.message});
    out.reported.push_back({"rabi_amplitude_" + tag, "", fit.params[1], fit.errors[1], fit.ci_low[1],
                            fit.ci_high[1], ""});
    out.reported.push_back({"fit_residual_" + tag, "", fit.residual_sum, kNaN, kNaN, kNaN, ""});
    fitted[charge] = {fit.params[3], fit.ci_high[3] - fit.params[3], fit.params[1]};
  }
  if (!fitted.count(ChargeState::Minus) || !fitted.count(ChargeState::Plus)) {
    throw Error(ErrorCode::InvalidArgument, "rabi comparison needs an NV- and an NV+ voltage");
  }
  const Fitted& m = fitted[ChargeState::Minus];
  const Fitted& p = fitted[ChargeState::Plus];
  const double ratio = m.frequency / p.frequency;
  const double half = ratio * std::hypot(m.half_width / m.frequency, p.half_width / p.frequency);
  const double closed = rabi_ratio_closed_form(config.params, Isotope::N15);
  out.reported.push_back({"frequency_ratio", "", ratio, half / 1.96, ratio - half, ratio + half, ""});
  out.reported.push_back({"closed_form_ratio", "", closed, kNaN, kNaN, kNaN, ""});
  if (shots <= 0) {
    out.checks.push_back(relative_check("frequency_ratio", ratio, closed, 0.01));
  } else {
    out.checks.push_back(interval_check("frequency_ratio", out.reported[out.reported.size() - 2], closed));
  }
  Check amp;
  amp.name = "amplitude_plus_gt_minus";
  amp.value = p.amplitude - m.amplitude;
  amp.target = 0.0;
  amp.tolerance = kNaN;
  amp.passed = config.profile.w_plus_max > config.profile.w_minus_max ? p.amplitude > m.amplitude : true;
  amp.detail = "NV+ amplitude minus NV- amplitude";
  out.checks.push_back(amp);
  return out;
}

ExperimentResult run_settling_scan(const Config& config, const std::vector<double>& t_u, int shots) {
  ExperimentResult out;
  out.name = "settle";
  out.seed = config.seed;
  out.shots = shots;
  const Series s = settle_series(config, t_u);
  const Sampled d = sample_series(s, config.readout, shots, config.seed);
  out.table = series_table();
  append_series(out.table, s, d);
  const Reported tau = fit_decay("settle_tau", s.x, d.y, FitModel::ExponentialApproach);
  out.reported.push_back(tau);
  const double target = config.profile.settle_tau / kMicrosecondsPerMillisecond;
  out.checks.push_back(shots <= 0 ? relative_check("settle_tau", tau.value, target, 0.05)
                                  : interval_check("settle_tau", tau, target));
  return out;
}

ExperimentResult run_quadrupole_spectroscopy(const Config& config) {
  ExperimentResult out;
  out.name = "quadrupole";
  out.seed = config.seed;
  out.shots = 0;
  const auto& sp = config.spectroscopy;
  out.table.columns = {"charge", "sector_ms", "line_up_MHz", "line_up_exact_MHz", "line_down_MHz",
                       "line_down_exact_MHz", "quadrupole_MHz", "configured_MHz"};
  if (sp.isotope == Isotope::N15) {
    for (ChargeState c : kAllChargeStates) {
      out.table.rows.push_back({std::string(to_string(c)), format_projection(default_sector(c)), kNaN, kNaN,
                                kNaN, kNaN, std::string("not applicable"), std::string("not applicable")});
    }
    Check c;
    c.name = "quadrupole_applicable";
    c.passed = true;
    c.value = kNaN;
    c.target = kNaN;
    c.tolerance = kNaN;
    c.detail = "not applicable: 15N has I = 1/2 and no quadrupole term";
    out.checks.push_back(c);
    out.notes.push_back("not applicable for 15N");
    return out;
  }

  const Isotope iso = sp.isotope;
  const int n = static_cast<int>(std::floor((sp.f_max - sp.f_min) / sp.step)) + 1;
  for (ChargeState charge : kAllChargeStates) {
    const Eigensystem eig = diagonalize(build_hamiltonian(charge, iso, config.params));
    const Operator v = drive_operator(charge, iso, config.params);
    const Projection sector = default_sector(charge);
    const Projection up{2}, mid{0}, down{-2};

    auto locate = [&](Projection start) {
      const int idx = eigenstate_index(eig, charge, iso, sector, start);
      const StateVector psi = eig.vectors.col(idx);
      const DensityMatrix rho0 = DensityMatrix::pure(psi);
      std::vector<double> signal(n, 0.0);
      parallel_for(static_cast<std::size_t>(n), [&](std::size_t k) {
        const double f = sp.f_min + static_cast<double>(k) * sp.step;
        const auto pair = find_resonant_pair(eig, v, f);
        if (!pair || std::abs(pair->detuning) > config.detuning_window) return;
        const double rabi = sp.rf_amplitude * std::abs(pair->matrix_element);
        if (!(rabi > 0)) return;
        DrivenOptions opt;
        opt.detuning_window = config.detuning_window;
        const auto res = evolve_driven(rho0, eig, v, DriveField{sp.rf_amplitude, f, 0.0}, 0.5 / rabi, opt);
        signal[k] = 1.0 - (psi.adjoint() * res.rho.matrix() * psi)(0, 0).real();
      });
      const int best = static_cast<int>(std::max_element(signal.begin(), signal.end()) - signal.begin());
      double f = sp.f_min + best * sp.step;
      if (best > 0 && best + 1 < n) {
        const double a = signal[best - 1], b = signal[best], c = signal[best + 1];
        const double denom = a - 2.0 * b + c;
        if (denom < 0) f += 0.5 * (a - c) / denom * sp.step;
      }
      return std::pair<double, double>{f, signal[best]};
    };
    const auto [f_up, peak_up] = locate(up);
    const auto [f_down, peak_down] = locate(down);

    double exact_up = kNaN, exact_down = kNaN;
    for (const auto& line : nmr_transition_frequencies(charge, iso, sector, config.params)) {
      if (line.upper == up && line.lower == mid) exact_up = std::abs(line.frequency);
      if (line.upper == mid && line.lower == down) exact_down = std::abs(line.frequency);
    }

    // Signed lines: f_up = Q + L + h(+1) - h(0), f_down = -Q + L + h(0) - h(-1), with
    // L the Zeeman plus first-order hyperfine term and h the second-order shifts.
    const auto& nuc = config.params.nucleus(iso);
    double linear = nuc.gamma_n * config.params.b_z;
    if (charge == ChargeState::Minus) linear += nuc.a_par * sector.value();
    if (charge == ChargeState::Zero) linear += nuc.a_zero * sector.value();
    auto h = [&](Projection m) { return hyperfine_shift_second_order(charge, iso, sector, m, config.params); };
    double best_q = kNaN, best_gap = std::numeric_limits<double>::infinity();
    for (double s1 : {1.0, -1.0}) {
      for (double s2 : {1.0, -1.0}) {
        const double qa = s1 * f_up - linear - h(up) + h(mid);
        const double qb = -(s2 * f_down - linear - h(mid) + h(down));
        if (std::abs(qa - qb) < best_gap) {
          best_gap = std::abs(qa - qb);
          best_q = 0.5 * (qa + qb);
        }
      }
    }
    const double configured = config.params.quadrupole(charge, iso);
    const std::string tag(to_string(charge));
    out.table.rows.push_back({tag, format_projection(sector), f_up, exact_up, f_down, exact_down, best_q,
                              configured});
    out.reported.push_back({"quadrupole_" + tag, "MHz", best_q, kNaN, kNaN, kNaN,
                            "line consistency " + format_number(best_gap) + " MHz"});
    Check c;
    c.name = "quadrupole_" + tag;
    c.value = std::abs(best_q);
    c.target = std::abs(configured);
    c.tolerance = 0.5 * sp.linewidth;
    c.passed = std::abs(c.value - c.target) <= c.tolerance && peak_up > 0.5 && peak_down > 0.5;
    c.detail = "|Q| within half a linewidth of the configured value";
    out.checks.push_back(c);
  }
  out.notes.push_back("Zeeman and hyperfine contributions are subtracted analytically");
  return out;
}

ExperimentResult run_echo(const Config& config, int shots) {
  ExperimentResult out;
  out.name = "echo";
  out.seed = config.seed;
  out.shots = shots;
  out.table = series_table();
  const Series plus = echo_plus_series(config);
  const Series minus = echo_minus_series(config);
  const Sampled dp = sample_series(plus, config.readout, shots, config.seed);
  const Sampled dm = sample_series(minus, config.readout, shots, config.seed);
  append_series(out.table, plus, dp);
  append_series(out.table, minus, dm);
  const Reported t2p = fit_decay("t2_plus", plus.x, dp.y, FitModel::ExponentialDecay);
  const Reported t2m = fit_decay("t2_minus", minus.x, dm.y, FitModel::ExponentialDecay);
  out.reported.push_back(t2p);
  out.reported.push_back(t2m);
  const double cfg_p = config.relaxation.plus.t2_n / kMicrosecondsPerMillisecond;
  const double cfg_m = config.relaxation.minus.t2_n / kMicrosecondsPerMillisecond;
  if (std::isfinite(cfg_p)) out.checks.push_back(lifetime_check("t2_plus", t2p, cfg_p, shots));
  if (std::isfinite(cfg_m)) out.checks.push_back(lifetime_check("t2_minus", t2m, cfg_m, shots));

  Reported ratio;
  ratio.name = "lengthening_ratio";
  ratio.value = t2p.value / t2m.value;
  ratio.error = ratio.value * std::hypot(t2p.error / t2p.value, t2m.error / t2m.value);
  ratio.ci_low = ratio.value - 1.96 * ratio.error;
  ratio.ci_high = ratio.value + 1.96 * ratio.error;
  out.reported.push_back(ratio);
  if (std::isfinite(cfg_p) && std::isfinite(cfg_m)) {
    out.checks.push_back(shots <= 0 ? relative_check("lengthening_ratio", ratio.value, cfg_p / cfg_m, 0.05)
                                    : interval_check("lengthening_ratio", ratio, cfg_p / cfg_m));
  }
  out.notes.push_back("NV- echo is simulated at fixed charge; NV+ echo runs the echo template at +10 V");
  return out;
}

ExperimentResult run_t1(const Config& config, int shots) {
  ExperimentResult out;
  out.name = "t1";
  out.seed = config.seed;
  out.shots = shots;
  out.table = series_table();
  const Series s = t1_series(config);
  const Sampled d = sample_series(s, config.readout, shots, config.seed);
  append_series(out.table, s, d);
  const Reported t1 = fit_decay("t1_plus", s.x, d.y, FitModel::ExponentialApproach);
  out.reported.push_back(t1);
  const double cfg = config.relaxation.plus.t1_n / kMicrosecondsPerMillisecond;
  if (std::isfinite(cfg)) out.checks.push_back(lifetime_check("t1_plus", t1, cfg, shots));
  return out;
}

ExperimentResult run_lifetimes(const Config& config, int shots) {
  ExperimentResult out = run_echo(config, shots);
  out.name = "lifetimes";
  const ExperimentResult t1 = run_t1(config, shots);
  out.table.rows.insert(out.table.rows.end(), t1.table.rows.begin(), t1.table.rows.end());
  out.reported.insert(out.reported.end(), t1.reported.begin(), t1.reported.end());
  out.checks.insert(out.checks.end(), t1.checks.begin(), t1.checks.end());

  const Series rabi = long_rabi_series(config);
  const Sampled d = sample_series(rabi, config.readout, shots, config.seed);
  append_series(out.table, rabi, d);
  Reported decay;
  if (is_flat(d.y)) {
    decay = no_decay("rabi_decay_plus", "ms");
  } else {
    const FitResult fit = fit_curve(rabi.x, d.y, FitModel::CosineDecay);
    decay = decay_time("rabi_decay_plus", fit, 2, "ms", 1.0);
  }
  out.reported.push_back(decay);
  const double cfg = config.relaxation.plus.rabi_decay / kMicrosecondsPerMillisecond;
  if (std::isfinite(cfg)) out.checks.push_back(lifetime_check("rabi_decay_plus", decay, cfg, shots));
  return out;
}

ExperimentResult run_program(const Config& config, const PulseProgram& program, int shots, GateModel gate) {
  ExperimentResult out;
  out.name = program.name.empty() ? "program" : program.name;
  out.seed = config.seed;
  out.shots = shots;
  const auto runs = run_points(config, program, gate);
  collect_warnings(runs, out.warnings);
  for (const auto& s : program.sweeps) {
    const std::string unit = s.values.empty() ? "" : s.values.front().unit;
    out.table.columns.push_back(unit.empty() ? s.name : s.name + "_" + unit);
  }
  for (const char* c : {"readout", "time_us", "flip", "flip_stderr", "flip_exact", "signal", "w_minus",
                        "w_zero", "w_plus"}) {
    out.table.columns.push_back(c);
  }
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    for (std::size_t k = 0; k < r.result.readouts.size(); ++k) {
      const ReadoutRecord& rec = r.result.readouts[k];
      std::vector<Cell> row;
      for (const auto& s : program.sweeps) row.push_back(r.bindings.at(s.name).value);
      double flip = rec.flip_probability, err = 0.0;
      if (shots > 0) {
        Rng rng(derive_seed(config.seed, out.name, i * 64 + k));
        const ShotEstimate e = sample_shots(rec.flip_probability, config.readout,
                                            static_cast<std::uint64_t>(shots), rng);
        flip = e.flip;
        err = e.flip_stderr;
      }
      const double signal = config.readout.baseline + config.readout.contrast * flip;
      row.insert(row.end(), {static_cast<double>(k), rec.time, flip, err, rec.flip_probability, signal,
                             rec.charge.w_minus, rec.charge.w_zero, rec.charge.w_plus});
      out.table.rows.push_back(std::move(row));
    }
  }
  return out;
}

namespace {

Node parse_node(const YAML::Node& n, int index) {
  const std::string where = "nodes[" + std::to_string(index) + "]";
  if (!n.IsMap()) throw Error(ErrorCode::Config, where + ": expected a mapping");
  Node node;
  for (const auto& kv : n) {
    const std::string key = kv.first.as<std::string>();
    try {
      if (key == "id") {
        node.id = kv.second.as<std::string>();
      } else if (key == "position_nm") {
        const auto v = kv.second.as<std::vector<double>>();
        if (v.size() != 3) throw Error(ErrorCode::Config, "position_nm needs three numbers");
        node.position = Eigen::Vector3d(v[0], v[1], v[2]);
      } else if (key == "isotope") {
        node.isotope = parse_isotope(kv.second.as<std::string>());
      } else {
        throw Error(ErrorCode::Config, "unknown key");
      }
    } catch (const YAML::Exception&) {
      throw Error(ErrorCode::Config, where + "." + key + ": wrong type");
    } catch (const Error& e) {
      throw Error(ErrorCode::Config, where + "." + key + ": " + e.what());
    }
  }
  if (node.id.empty()) node.id = std::string(1, static_cast<char>('A' + index));
  return node;
}

ProtocolStep parse_step(const YAML::Node& n, const std::vector<Node>& nodes, int index) {
  const std::string where = "steps[" + std::to_string(index) + "]";
  if (!n.IsMap()) throw Error(ErrorCode::Config, where + ": expected a mapping");
  ProtocolStep step;
  bool have_phase = false, have_wait = false;
  std::string node_id;
  for (const auto& kv : n) {
    const std::string key = kv.first.as<std::string>();
    try {
      if (key == "phase") {
        step.phase = parse_protocol_phase(kv.second.as<std::string>());
        have_phase = true;
      } else if (key == "wait_ms") {
        step.kind = ProtocolStep::Kind::Wait;
        step.wait = kv.second.as<double>() * kMicrosecondsPerMillisecond;
        have_wait = true;
      } else if (key == "node") {
        node_id = kv.second.as<std::string>();
      } else {
        throw Error(ErrorCode::Config, "unknown key");
      }
    } catch (const YAML::Exception&) {
      throw Error(ErrorCode::Config, where + "." + key + ": wrong type");
    } catch (const Error& e) {
      throw Error(ErrorCode::Config, where + "." + key + ": " + e.what());
    }
  }
  if (have_phase == have_wait) throw Error(ErrorCode::Config, where + ": give exactly one of phase, wait_ms");
  if (have_wait && !(step.wait >= 0)) throw Error(ErrorCode::Config, where + ": wait_ms must be >= 0");
  if (!node_id.empty()) {
    const auto it = std::find_if(nodes.begin(), nodes.end(), [&](const Node& x) { return x.id == node_id; });
    if (it == nodes.end()) throw Error(ErrorCode::Config, where + ": unknown node '" + node_id + "'");
    step.node = static_cast<int>(it - nodes.begin());
  }
  return step;
}

}  // namespace

ProtocolScenario parse_scenario(std::string_view yaml) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml));
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::Config, std::string("YAML syntax: ") + e.what());
  }
  if (!root.IsMap()) throw Error(ErrorCode::Config, "scenario root must be a mapping");
  ProtocolScenario sc;
  YAML::Node steps;
  for (const auto& kv : root) {
    const std::string key = kv.first.as<std::string>();
    try {
      if (key == "nodes") {
        if (!kv.second.IsSequence()) throw Error(ErrorCode::Config, "nodes: expected a list");
        int i = 0;
        for (const auto& n : kv.second) sc.nodes.push_back(parse_node(n, i++));
      } else if (key == "noiseless") {
        sc.noiseless = kv.second.as<bool>();
      } else if (key == "storage_tau_ms") {
        sc.storage_tau = kv.second.as<double>() * kMicrosecondsPerMillisecond;
      } else if (key == "steps") {
        steps = kv.second;
      } else {
        throw Error(ErrorCode::Config, key + ": unknown key");
      }
    } catch (const YAML::Exception&) {
      throw Error(ErrorCode::Config, key + ": wrong type");
    }
  }
  if (sc.nodes.size() > 2) {
    throw Error(ErrorCode::Capability, "registers with more than two nodes are not supported (got " +
                                           std::to_string(sc.nodes.size()) + ")");
  }
  if (sc.nodes.size() != 2) throw Error(ErrorCode::Config, "scenario needs exactly two nodes");
  if (!(sc.storage_tau >= 0)) throw Error(ErrorCode::Config, "storage_tau_ms must be >= 0");
  if (steps) {
    if (!steps.IsSequence()) throw Error(ErrorCode::Config, "steps: expected a list");
    int i = 0;
    for (const auto& s : steps) sc.steps.push_back(parse_step(s, sc.nodes, i++));
  }
  return sc;
}

ProtocolScenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read scenario file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_scenario(buf.str());
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

ProtocolScenario default_scenario() {
  ProtocolScenario sc;
  sc.nodes = {{"A", Eigen::Vector3d(0, 0, 0), Isotope::N15}, {"B", Eigen::Vector3d(10, 0, 0), Isotope::N15}};
  using K = ProtocolStep::Kind;
  sc.steps = {{K::Phase, ProtocolPhase::Initialization, 0, 0.0},
              {K::Phase, ProtocolPhase::Operation, 0, 0.0},
              {K::Wait, ProtocolPhase::Initialization, 0, 15000.0},
              {K::Phase, ProtocolPhase::Readout, 0, 0.0},
              {K::Phase, ProtocolPhase::Readout, 1, 0.0}};
  return sc;
}

ExperimentResult run_protocol(const Config& config, const ProtocolScenario& scenario) {
  ExperimentResult out;
  out.name = "protocol";
  out.seed = config.seed;
  RegisterOptions noisy;
  noisy.relaxation = config.relaxation;
  noisy.gamma_e = config.params.gamma_e;
  noisy.k_dd = config.reg.k_dd;
  noisy.swap_error = config.reg.swap_error;
  noisy.dark_attachment = config.reg.dark_attachment;
  RegisterOptions ideal = noisy;
  ideal.relaxation = RelaxationSet{};
  ideal.swap_error = 0.0;
  const RegisterOptions& used = scenario.noiseless ? ideal : noisy;

  Register reg(scenario.nodes, used);
  Rng rng(derive_seed(config.seed, "protocol"));
  out.table.columns = {"step", "action", "node", "charge_A", "charge_B", "bell_fidelity", "coherence_A",
                       "coherence_B", "outcome", "probability"};
  double last_bell = kNaN;
  for (std::size_t i = 0; i < scenario.steps.size(); ++i) {
    const ProtocolStep& step = scenario.steps[i];
    std::string action;
    double outcome = kNaN, probability = kNaN;
    std::string node = "";
    if (step.kind == ProtocolStep::Kind::Wait) {
      reg.wait(step.wait);
      action = "wait " + format_number(step.wait / kMicrosecondsPerMillisecond) + " ms";
    } else {
      action = std::string(to_string(step.phase));
      const auto records = reg.run_phase(step.phase, rng, step.node);
      if (step.phase == ProtocolPhase::Operation) last_bell = reg.bell_fidelity();
      if (!records.empty()) {
        node = records.front().node;
        outcome = records.front().outcome;
        probability = records.front().probability;
      }
    }
    out.table.rows.push_back({static_cast<double>(i), action, node, std::string(to_string(reg.charge(0))),
                              std::string(to_string(reg.charge(1))), reg.bell_fidelity(),
                              reg.nuclear_coherence(0), reg.nuclear_coherence(1), outcome, probability});
  }
  const double j = reg.coupling();
  out.reported.push_back({"coupling", "MHz", j, kNaN, kNaN, kNaN, ""});
  out.reported.push_back({"gate_time", "us", j != 0 ? 1.0 / (2.0 * std::abs(j)) : kNaN, kNaN, kNaN, kNaN, ""});
  if (std::isfinite(last_bell)) out.reported.push_back({"bell_fidelity", "", last_bell, kNaN, kNaN, kNaN, ""});

  // Reference checks on the same geometry.
  Register ref(scenario.nodes, ideal);
  Rng ref_rng(derive_seed(config.seed, "protocol-reference"));
  ref.run_phase(ProtocolPhase::Initialization, ref_rng);
  ref.run_phase(ProtocolPhase::Operation, ref_rng);
  Check bell;
  bell.name = "noiseless_bell_fidelity";
  bell.value = ref.bell_fidelity();
  bell.target = 0.999;
  bell.tolerance = kNaN;
  bell.passed = bell.value >= 0.999;
  bell.detail = "initialization and operation without noise";
  out.checks.push_back(bell);

  const double tau = scenario.storage_tau;
  const double ratio = storage_coherence_ratio(noisy, scenario.nodes[0].isotope, tau);
  const double closed = std::exp(tau * (1.0 / config.relaxation.minus.t2_n - 1.0 / config.relaxation.plus.t2_n));
  out.reported.push_back({"storage_ratio", "", ratio, kNaN, kNaN, kNaN, ""});
  out.checks.push_back(relative_check("storage_ratio", ratio, closed, 0.01));

  Check magic;
  magic.name = "magic_angle_coupling";
  magic.value = dipole_coupling(Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(5, 5, 5), config.params.gamma_e,
                                config.reg.k_dd);
  magic.target = 0.0;
  magic.tolerance = 0.0;
  magic.passed = magic.value == 0.0;
  magic.detail = "cos^2(theta) = 1/3";
  out.checks.push_back(magic);
  return out;
}

std::map<std::string, double> closed_loop_coverage(const Config& config, int reps, int shots) {
  if (reps < 1 || shots < 1) throw Error(ErrorCode::InvalidArgument, "coverage needs reps >= 1 and shots >= 1");
  struct Target {
    std::string name;
    Series series;
    FitModel model;
    double value;
  };
  std::vector<Target> targets{
      {"t2_plus", echo_plus_series(config), FitModel::ExponentialDecay,
       config.relaxation.plus.t2_n / kMicrosecondsPerMillisecond},
      {"t2_minus", echo_minus_series(config), FitModel::ExponentialDecay,
       config.relaxation.minus.t2_n / kMicrosecondsPerMillisecond},
      {"t1_plus", t1_series(config), FitModel::ExponentialApproach,
       config.relaxation.plus.t1_n / kMicrosecondsPerMillisecond},
      {"rabi_decay_plus", long_rabi_series(config), FitModel::CosineDecay,
       config.relaxation.plus.rabi_decay / kMicrosecondsPerMillisecond},
      {"settle_tau", settle_series(config, {}), FitModel::ExponentialApproach,
       config.profile.settle_tau / kMicrosecondsPerMillisecond},
  };
  std::map<std::string, double> out;
  for (const auto& t : targets) {
    std::vector<int> hit(reps, 0);
    parallel_for(static_cast<std::size_t>(reps), [&](std::size_t r) {
      const Sampled d = sample_series(t.series, config.readout, shots, derive_seed(config.seed, "coverage", r));
      try {
        const FitResult fit = fit_curve(t.series.x, d.y, t.model);
        const Reported rep = decay_time(t.name, fit, 2, "ms", 1.0);
        hit[r] = rep.ci_low <= t.value && t.value <= rep.ci_high;
      } catch (const Error&) {
        hit[r] = 0;
      }
    });
    int total = 0;
    for (int h : hit) total += h;
    out[t.name] = static_cast<double>(total) / reps;
  }
  return out;
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"scan-charge", "rabi", "echo", "t1", "settle",
                                              "quadrupole", "lifetimes", "protocol", "selftest"};
  return names;
}

ExperimentResult run_experiment(const std::string& name, const Config& config) {
  const int shots = config.readout.shots;
  if (name == "scan-charge") return run_charge_scan(config, config.scan_voltages, shots);
  if (name == "rabi") return run_rabi_comparison(config, shots);
  if (name == "echo") return run_echo(config, shots);
  if (name == "t1") return run_t1(config, shots);
  if (name == "settle") return run_settling_scan(config, {}, shots);
  if (name == "quadrupole") return run_quadrupole_spectroscopy(config);
  if (name == "lifetimes") return run_lifetimes(config, shots);
  if (name == "protocol") return run_protocol(config, default_scenario());
  if (name == "selftest") return run_selftest(config);
  throw Error(ErrorCode::InvalidArgument, "unknown experiment '" + name + "'");
}

}  // namespace nvsim

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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

#include "nvsim/experiments.hpp"
#include "nvsim/selftest.hpp"

using namespace nvsim;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

bool all_checks(const ExperimentResult& r, std::string& detail) {
  bool ok = true;
  for (const auto& c : r.checks) {
    if (!c.passed) {
      ok = false;
      detail += " [" + c.name + " failed: " + c.detail + "]";
    }
  }
  return ok;
}

double fitted_frequency(const Trace& t) { return fit_curve(t.x, t.y, FitModel::CosineDecay).params[3]; }

Outcome closed_form_ratio() {
  const double r = rabi_ratio_closed_form(PhysicalParams{});
  const double dev = std::abs(r / 1.832 - 1.0);
  return {dev <= 1e-3, fmt("ratio %.5f vs 1.832, deviation %.2e (limit 1e-3)", r, dev)};
}

Outcome dynamic_ratio() {
  const PhysicalParams p;
  std::vector<double> t;
  for (int i = 0; i <= 60; ++i) t.push_back(5.0 * i);
  const double b1 = 5e-3;
  const Trace minus = simulate_rabi({ChargeState::Minus, Isotope::N15, Projection{0}, Projection{1}}, p, {}, b1, t);
  const Trace plus = simulate_rabi({ChargeState::Plus, Isotope::N15, Projection{0}, Projection{1}}, p, {}, b1, t);
  const double ratio = fitted_frequency(minus) / fitted_frequency(plus);
  const double closed = rabi_ratio_closed_form(p);
  const double dev = std::abs(ratio / closed - 1.0);

  // Lab-frame oracle on NV+ over one and a half Rabi periods.
  const Operator h0 = build_hamiltonian(ChargeState::Plus, Isotope::N15, p);
  const Operator v = drive_operator(ChargeState::Plus, Isotope::N15, p);
  const Eigensystem eig = diagonalize(h0);
  const auto line = nmr_transition_frequencies(ChargeState::Plus, Isotope::N15, Projection{0}, p).front();
  const DriveField field{b1, std::abs(line.frequency), 0.0};
  const DensityMatrix rho = DensityMatrix::basis_state(2, line.upper_state);
  double worst = 0.0;
  for (double dur : {10.0, 40.0, 70.0, 100.0, 140.0}) {
    const Operator fast = evolve_driven(rho, eig, v, field, dur).rho.matrix();
    const Operator lab = evolve_driven_lab_frame(rho, h0, v, field, dur).matrix();
    const Operator a = eig.vectors.adjoint() * fast * eig.vectors;
    const Operator b = eig.vectors.adjoint() * lab * eig.vectors;
    for (int k = 0; k < 2; ++k) worst = std::max(worst, std::abs(a(k, k).real() - b(k, k).real()));
  }
  return {dev <= 0.01 && worst <= 1e-3,
          fmt("fitted ratio %.5f vs closed form %.5f, deviation %.2e (limit 1e-2); lab-frame population "
              "difference %.2e (limit 1e-3)",
              ratio, closed, dev, worst)};
}

Outcome dressed_states() {
  auto deviation = [](double scale) {
    PhysicalParams p;
    p.n15.a_par *= scale;
    p.n15.a_perp *= scale;
    const Eigensystem eig = diagonalize(build_hamiltonian(ChargeState::Minus, Isotope::N15, p));
    const int i = eigenstate_index(eig, ChargeState::Minus, Isotope::N15, Projection{0}, Projection{1});
    return infidelity(eig.vectors.col(i), dressed_states_first_order(p).first);
  };
  const double at_default = deviation(1.0);
  // Log-log slope of the deviation over a tenfold hyperfine sweep.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int n = 11;
  for (int k = 0; k < n; ++k) {
    const double s = 10.0 * std::pow(10.0, k / 10.0);
    const double x = std::log(s), y = std::log(deviation(s));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {at_default <= 1e-4 && std::abs(slope - 4.0) <= 0.3,
          fmt("1 - overlap %.2e at default hyperfine (limit 1e-4); log-log slope %.3f over 10x-100x (4 +/- 0.3)",
              at_default, slope)};
}

Outcome quadrupole_conversion() {
  const double q_lo = 0.0193, q_hi = 0.0208;
  const double vzz = efg_from_quadrupole(-4.92, 0.5 * (q_lo + q_hi));
  const double half = 0.5 * std::abs(quadrupole_from_efg(vzz, q_hi) - quadrupole_from_efg(vzz, q_lo));
  const double dev = std::abs(half / 0.19 - 1.0);
  return {dev <= 0.05, fmt("half-spread %.4f MHz vs 0.19, deviation %.3f (limit 0.05)", half, dev)};
}

Outcome quadrupole_spectroscopy() {
  const ExperimentResult r = run_quadrupole_spectroscopy(default_config());
  std::string d = "|Q| =";
  for (const char* c : {"quadrupole_minus", "quadrupole_zero", "quadrupole_plus"}) {
    const Check* k = r.find_check(c);
    if (!k) return {false, std::string("missing ") + c};
    d += fmt(" %.4f", k->value);
  }
  d += " MHz vs (4.945, 4.655, 4.619), tolerance " + fmt("%.3f", 0.5 * default_config().spectroscopy.linewidth);
  const bool ok = all_checks(r, d);
  return {ok, d};
}

Outcome lifetimes() {
  Config c = default_config();
  const ExperimentResult exact = run_lifetimes(c, 0);
  std::string d = "exact:";
  for (const char* n : {"t2_plus", "t1_plus", "rabi_decay_plus", "lengthening_ratio"}) {
    if (const Reported* r = exact.find(n)) d += " " + std::string(n) + "=" + fmt("%.4g", r->value);
  }
  bool ok = all_checks(exact, d);
  const ExperimentResult noisy = run_lifetimes(c, 1000);
  d += "; 1000 shots:";
  for (const char* n : {"t2_plus", "t1_plus", "rabi_decay_plus"}) {
    const Check* k = noisy.find_check(n);
    if (!k) return {false, std::string("missing ") + n};
    d += " " + std::string(n) + (k->passed ? " in " : " NOT in ") + k->detail;
    ok = ok && k->passed;
  }
  return {ok, d};
}

Outcome settling() {
  const ExperimentResult r = run_settling_scan(default_config(), {}, 0);
  const Check* k = r.find_check("settle_tau");
  if (!k) return {false, "missing settle_tau"};
  return {k->passed, fmt("tau %.4f ms vs 0.54, deviation %.3f (limit 0.05)", k->value, k->value / 0.54 - 1.0)};
}

Outcome charge_scan() {
  const Config c = default_config();
  const ExperimentResult r = run_charge_scan(c, c.scan_voltages, 10000);
  const Check* lo = r.find_check("w_pm_at_-8V");
  const Check* hi = r.find_check("w_pm_at_+8V");
  if (!lo || !hi) return {false, "scan voltages must include -8 V and +8 V"};
  return {lo->passed && hi->passed,
          fmt("W+-(-8 V) = %.4f (0.70 +/- %.4f), W+-(+8 V) = %.4f (>= 0.98 - %.4f), 10^4 shots", lo->value,
              lo->tolerance, hi->value, hi->tolerance)};
}

Outcome selftest() {
  const ExperimentResult r = run_selftest(default_config());
  std::string d = std::to_string(r.checks.size()) + " invariants";
  const bool ok = all_checks(r, d);
  return {ok, d};
}

Outcome protocol() {
  const ExperimentResult r = run_protocol(default_config(), default_scenario());
  const Check* b = r.find_check("noiseless_bell_fidelity");
  const Check* s = r.find_check("storage_ratio");
  const Check* m = r.find_check("magic_angle_coupling");
  if (!b || !s || !m) return {false, "missing protocol checks"};
  std::string d = fmt("Bell fidelity %.6f (>= 0.999); storage ratio %.6g vs %.6g (1%%); magic-angle J = %g",
                      b->value, s->value, s->target, m->value);
  return {b->passed && s->passed && m->passed, d};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_s;  // runtime limit, 0 for none
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {1, "closed-form Rabi ratio", 1, closed_form_ratio},
      {2, "dynamic Rabi ratio and lab-frame oracle", 60, dynamic_ratio},
      {3, "dressed-state oracle", 0, dressed_states},
      {4, "quadrupole conversion spread", 0, quadrupole_conversion},
      {5, "quadrupole spectroscopy closed loop", 60, quadrupole_spectroscopy},
      {6, "lifetime recovery", 0, lifetimes},
      {7, "settling recovery", 0, settling},
      {8, "charge scan", 300, charge_scan},
      {9, "invariant suite", 60, selftest},
      {10, "register protocol", 0, protocol},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_s > 0 && secs > c.limit_s) {
      o.passed = false;
      o.detail += fmt(" [runtime %.1f s over the %.0f s limit]", secs, c.limit_s);
    }
    if (!o.passed) ++failures;
    std::printf("%s  %2d %-42s %s (%.2f s)\n", o.passed ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
  }
  std::printf("%d of 10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}

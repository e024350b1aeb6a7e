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

#include "nvsim/selftest.hpp"

#include <algorithm>
#include <cmath>

#include "nvsim/charge_model.hpp"
#include "nvsim/executor.hpp"

namespace nvsim {

namespace {

Check bound_check(const std::string& name, double value, double bound, const std::string& detail) {
  Check c;
  c.name = name;
  c.value = value;
  c.target = 0.0;
  c.tolerance = bound;
  c.passed = std::isfinite(value) && value <= bound;
  c.detail = detail;
  return c;
}

Operator random_state(int dim, Rng& rng) {
  Operator a(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) a(i, j) = Complex(rng.normal(), rng.normal());
  }
  Operator rho = a * a.adjoint();
  return rho / rho.trace().real();
}

struct StateErrors {
  double trace = 0.0;
  double hermiticity = 0.0;
  double min_eigenvalue = 0.0;
  int segments = 0;
};

void observe_templates(const Config& config, GateModel gate, StateErrors& err) {
  for (const auto& [name, program] : builtin_templates()) {
    const auto bindings = expand_sweeps(program);
    const Executor executor(config.executor_options(gate), program.isotope.value_or(Isotope::N15));
    // First, middle and last sweep points keep the run short.
    for (std::size_t k : {std::size_t{0}, bindings.size() / 2, bindings.size() - 1}) {
      const CompiledSchedule sched = compile(program, config.compile_options(), bindings[k]);
      executor.run(sched, [&](std::size_t, const std::array<Operator, 3>& rho) {
        double total = 0.0;
        for (const Operator& r : rho) {
          total += r.trace().real();
          err.hermiticity = std::max(err.hermiticity, (r - r.adjoint()).cwiseAbs().maxCoeff());
          const Eigen::SelfAdjointEigenSolver<Operator> es(0.5 * (r + r.adjoint()), Eigen::EigenvaluesOnly);
          err.min_eigenvalue = std::min(err.min_eigenvalue, es.eigenvalues().minCoeff());
        }
        err.trace = std::max(err.trace, std::abs(total - 1.0));
        ++err.segments;
      });
    }
  }
}

}  // namespace

ExperimentResult run_selftest(const Config& config) {
  ExperimentResult out;
  out.name = "selftest";
  out.seed = config.seed;
  out.table.columns = {"check", "value", "bound", "passed"};
  Rng rng(derive_seed(config.seed, "selftest"));

  StateErrors err;
  observe_templates(config, GateModel::Physical, err);
  observe_templates(config, GateModel::IdealSelective, err);
  const std::string seg = "over " + std::to_string(err.segments) + " segments";
  out.checks.push_back(bound_check("trace_error", err.trace, kTraceTolerance, seg));
  out.checks.push_back(bound_check("hermiticity_error", err.hermiticity, kHermiticityTolerance, seg));
  out.checks.push_back(bound_check("negative_eigenvalue", -err.min_eigenvalue, -kPositivityTolerance, seg));

  // U(-t) U(t) = 1 on a random state, and the relaxation semigroup law.
  double reversal = 0.0, semigroup = 0.0, partial = 0.0;
  for (ChargeState c : kAllChargeStates) {
    for (Isotope iso : {Isotope::N14, Isotope::N15}) {
      const int dim = layout_for(c, iso).dim();
      const Operator h = build_hamiltonian(c, iso, config.params);
      const DensityMatrix rho = DensityMatrix::unchecked(random_state(dim, rng));
      const DensityMatrix back = evolve_unitary(evolve_unitary(rho, h, 0.37), h, -0.37);
      reversal = std::max(reversal, (back.matrix() - rho.matrix()).cwiseAbs().maxCoeff());

      RelaxationParams r;
      r.t1_n = 300.0;
      r.t2_n = 25.0;
      r.t1_e = 50.0;
      const DensityMatrix once = apply_relaxation(rho, 30.0, r, c, iso);
      const DensityMatrix twice = apply_relaxation(apply_relaxation(rho, 12.0, r, c, iso), 18.0, r, c, iso);
      semigroup = std::max(semigroup, (once.matrix() - twice.matrix()).cwiseAbs().maxCoeff());

      const Operator nuc = nuclear_reduced(rho.matrix(), c, iso);
      for (ChargeState to : kAllChargeStates) {
        for (ElectronAttachment a : {ElectronAttachment::MaximallyMixed, ElectronAttachment::Ground}) {
          const Operator switched = switch_charge(rho.matrix(), c, to, iso, a);
          partial = std::max(partial, (nuclear_reduced(switched, to, iso) - nuc).cwiseAbs().maxCoeff());
        }
      }
    }
  }
  out.checks.push_back(bound_check("unitary_reversal", reversal, 1e-10, "U(-t) U(t) rho U(t)^+ U(-t)^+ - rho"));
  out.checks.push_back(bound_check("relaxation_semigroup", semigroup, 1e-12, "R(30) - R(18) R(12)"));
  out.checks.push_back(bound_check("switch_nuclear_state", partial, 1e-12, "nuclear reduced state across switches"));

  int mismatched = 0;
  for (const auto& [name, program] : builtin_templates()) {
    const std::string printed = print_program(program);
    const PulseProgram reparsed = parse_program(printed);
    if (!(reparsed == program) || print_program(reparsed) != printed) ++mismatched;
    if (!(parse_program(builtin_template_source(name)) == program)) ++mismatched;
  }
  out.checks.push_back(bound_check("template_round_trip", mismatched, 0.0, "templates differing after print/parse"));

  Config small = config;
  small.readout.shots = 500;
  const std::vector<double> volts{-8.0, 0.0, 8.0};
  const std::string a = to_json(run_charge_scan(small, volts, small.readout.shots));
  const std::string b = to_json(run_charge_scan(small, volts, small.readout.shots));
  out.checks.push_back(bound_check("deterministic_output", a == b ? 0.0 : 1.0, 0.0, "two identical runs, byte comparison"));

  for (const auto& c : out.checks) {
    out.table.rows.push_back({c.name, c.value, c.tolerance, std::string(c.passed ? "yes" : "no")});
  }
  return out;
}

}  // namespace nvsim

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

#include <cmath>

#include "doctest.h"
#include "nvsim/dynamics.hpp"

using namespace nvsim;

TEST_SUITE("dynamics") {

TEST_CASE("propagator is unitary and evolution is reversible") {
  const PhysicalParams p;
  const Operator h = build_hamiltonian(ChargeState::Minus, Isotope::N14, p);
  const Operator u = propagator(h, 0.123);
  CHECK((u * u.adjoint() - identity(9)).cwiseAbs().maxCoeff() < 1e-12);
  const DensityMatrix rho = DensityMatrix::maximally_mixed(9);
  const DensityMatrix psi = DensityMatrix::basis_state(9, 4);
  const DensityMatrix back = evolve_unitary(evolve_unitary(psi, h, 0.5), h, -0.5);
  CHECK((back.matrix() - psi.matrix()).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((evolve_unitary(rho, h, 3.0).matrix() - rho.matrix()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("coherence decays as exp(-t/T2) without T1") {
  RelaxationParams r;
  r.t2_n = 25.0;
  StateVector plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const DensityMatrix rho = DensityMatrix::pure(plus);
  for (double t : {0.0, 5.0, 25.0, 60.0}) {
    const DensityMatrix out = apply_relaxation(rho, t, r, ChargeState::Plus, Isotope::N15);
    CHECK(std::abs(out.matrix()(0, 1)) == doctest::Approx(0.5 * std::exp(-t / 25.0)).epsilon(1e-12));
    CHECK(out.population(0) == doctest::Approx(0.5));
  }
}

TEST_CASE("T1 depolarizes populations towards the identity") {
  RelaxationParams r;
  r.t1_n = 100.0;
  r.t2_n = 100.0;
  const DensityMatrix rho = DensityMatrix::basis_state(3, 0);
  const double t = 70.0;
  const double lambda = std::exp(-t / 100.0);
  const DensityMatrix out = apply_relaxation(rho, t, r, ChargeState::Plus, Isotope::N14);
  CHECK(out.population(0) == doctest::Approx(lambda + (1.0 - lambda) / 3.0).epsilon(1e-12));
  CHECK(out.population(2) == doctest::Approx((1.0 - lambda) / 3.0).epsilon(1e-12));
}

TEST_CASE("relaxation parameters enforce complete positivity") {
  RelaxationParams r;
  r.t1_n = 10.0;
  r.t2_n = 20.0;
  CHECK_NOTHROW(r.validate(2));
  CHECK_THROWS_AS(r.validate(3), Error);
  r.t2_n = -1.0;
  CHECK_THROWS_AS(r.validate(2), Error);
}

TEST_CASE("NV+ Rabi oscillation is the bare two-level result") {
  const PhysicalParams p;
  const double b1 = 5e-3;
  const double omega = std::abs(p.n15.gamma_n) * b1 * 0.5;
  std::vector<double> ts;
  for (int i = 0; i <= 20; ++i) ts.push_back(i * 0.05 / omega);
  const Trace tr = simulate_rabi(SpinSetup{}, p, RelaxationParams{}, b1, ts);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double expected = std::pow(std::sin(kPi * omega * ts[i]), 2);
    CHECK(tr.y[i] == doctest::Approx(expected).epsilon(1e-6));
  }
}

TEST_CASE("rotating-frame drive agrees with the lab-frame integrator") {
  const PhysicalParams p;
  const Operator h0 = build_hamiltonian(ChargeState::Plus, Isotope::N14, p);
  const Operator v = drive_operator(ChargeState::Plus, Isotope::N14, p);
  const Eigensystem eig = diagonalize(h0);
  const auto lines = nmr_transition_frequencies(ChargeState::Plus, Isotope::N14, Projection{0}, p);
  const NmrLine& line = lines.front();
  const DriveField field{2e-2, std::abs(line.frequency), 0.3};
  const DensityMatrix rho = DensityMatrix::basis_state(3, line.upper_state);
  const auto pair = find_resonant_pair(eig, v, field.frequency);
  REQUIRE(pair);
  const double t = 0.7 / (field.amplitude * std::abs(pair->matrix_element));
  const DensityMatrix fast = evolve_driven(rho, eig, v, field, t).rho;
  const DensityMatrix lab = evolve_driven_lab_frame(rho, h0, v, field, t);
  const Operator hf = eig.vectors.adjoint() * fast.matrix() * eig.vectors;
  const Operator hl = eig.vectors.adjoint() * lab.matrix() * eig.vectors;
  for (int k = 0; k < 3; ++k) CHECK(std::abs(hf(k, k).real() - hl(k, k).real()) < 1e-3);
}

TEST_CASE("resonant pair picks the nearest line") {
  const PhysicalParams p;
  const Eigensystem eig = diagonalize(build_hamiltonian(ChargeState::Plus, Isotope::N15, p));
  const Operator v = drive_operator(ChargeState::Plus, Isotope::N15, p);
  const double f = std::abs(p.n15.gamma_n * p.b_z);
  const auto pair = find_resonant_pair(eig, v, f + 0.01);
  REQUIRE(pair);
  CHECK(pair->detuning == doctest::Approx(-0.01).epsilon(1e-9));
  CHECK(std::abs(pair->matrix_element) == doctest::Approx(0.5 * std::abs(p.n15.gamma_n)).epsilon(1e-12));
}

TEST_CASE("NV+ echo decays with the configured T2") {
  const PhysicalParams p;
  RelaxationParams r;
  r.t2_n = 25000.0;
  const std::vector<double> taus{0, 2000, 5000, 10000};
  const Trace tr = simulate_echo(SpinSetup{ChargeState::Plus, Isotope::N14, Projection{0}, Projection{2}}, p, r,
                                 5e-3, taus);
  for (std::size_t i = 0; i < taus.size(); ++i) {
    CHECK(tr.x[i] == doctest::Approx(2 * taus[i]));
    CHECK(tr.y[i] == doctest::Approx(std::exp(-2 * taus[i] / 25000.0)).epsilon(1e-6));
  }
}

}

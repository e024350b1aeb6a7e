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
#include "nvsim/register.hpp"

using namespace nvsim;

namespace {

std::vector<Node> pair_at(const Eigen::Vector3d& b) {
  return {{"A", Eigen::Vector3d::Zero(), Isotope::N15}, {"B", b, Isotope::N15}};
}

// Wootters concurrence of a two-qubit state.
double concurrence(const Operator& rho) {
  Operator yy = Operator::Zero(4, 4);
  yy(0, 3) = -1;
  yy(1, 2) = 1;
  yy(2, 1) = 1;
  yy(3, 0) = -1;
  const Operator tilde = yy * rho.conjugate() * yy;
  Eigen::ComplexEigenSolver<Operator> es(rho * tilde);
  std::vector<double> l;
  for (int i = 0; i < 4; ++i) l.push_back(std::sqrt(std::max(0.0, es.eigenvalues()(i).real())));
  std::sort(l.rbegin(), l.rend());
  return std::max(0.0, l[0] - l[1] - l[2] - l[3]);
}

}  // namespace

TEST_SUITE("register") {

TEST_CASE("dipole coupling geometry") {
  const double ge = 28024.0, k = 6.62607015e-8;
  const Eigen::Vector3d o = Eigen::Vector3d::Zero();
  CHECK(dipole_coupling(o, Eigen::Vector3d(0, 0, 10), ge, k) /
            dipole_coupling(o, Eigen::Vector3d(0, 0, 20), ge, k) ==
        doctest::Approx(8.0).epsilon(1e-14));
  CHECK(dipole_coupling(o, Eigen::Vector3d(1, 1, 1), ge, k) == 0.0);
  // Direct evaluation of k gamma^2 (1 - 3 cos^2) / r^3.
  const Eigen::Vector3d r(3, 0, 4);
  CHECK(dipole_coupling(o, r, ge, k) == doctest::Approx(k * ge * ge * (1 - 3 * 16.0 / 25.0) / 125.0));
  CHECK_THROWS_AS(dipole_coupling(o, o, ge, k), Error);
}

TEST_CASE("noiseless cycle produces a Bell state") {
  Register reg(pair_at(Eigen::Vector3d(10, 0, 0)), RegisterOptions{});
  Rng rng(1);
  reg.run_phase(ProtocolPhase::Initialization, rng);
  reg.run_phase(ProtocolPhase::Operation, rng);
  CHECK(reg.bell_fidelity() >= 0.999);
  CHECK(concurrence(reg.nuclear_state()) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(reg.charge(0) == ChargeState::Plus);
  CHECK(reg.charge(1) == ChargeState::Plus);
}

TEST_CASE("half-length entangling gate is not maximally entangling") {
  Register reg(pair_at(Eigen::Vector3d(10, 0, 0)), RegisterOptions{});
  reg.laser_init_all();
  reg.electron_hadamard(0);
  reg.electron_hadamard(1);
  reg.entangle(1.0 / (4.0 * std::abs(reg.coupling())));
  const int dims[] = {3, 2, 3, 2};
  const int keep[] = {0, 2};
  Operator e = partial_trace(reg.state(), dims, keep);
  // Restrict each electron to its {mS=0, mS=-1} qubit.
  Operator q(4, 4);
  const int idx[] = {1, 2};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) q(2 * a + b, 2 * c + d) = e(3 * idx[a] + idx[b], 3 * idx[c] + idx[d]);
  CHECK(concurrence(q) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-9));
}

TEST_CASE("NV+ nodes do not couple") {
  Register reg(pair_at(Eigen::Vector3d(10, 0, 0)), RegisterOptions{});
  reg.laser_init_all();
  reg.electron_hadamard(0);
  reg.electron_hadamard(1);
  reg.swap_electron_nuclear(0);
  reg.swap_electron_nuclear(1);
  reg.switch_charge(0, ChargeState::Plus);
  reg.switch_charge(1, ChargeState::Plus);
  reg.wait(1000.0);
  const Operator n = reg.nuclear_state();
  const int dims[] = {2, 2};
  const int ka[] = {0}, kb[] = {1};
  const Operator a = partial_trace(n, dims, ka), b = partial_trace(n, dims, kb);
  CHECK(reg.nuclear_coherence(0) == doctest::Approx(0.5));
  CHECK((n - kron(a, b)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("readout of one node leaves the other untouched when unentangled") {
  Register reg(pair_at(Eigen::Vector3d(10, 0, 0)), RegisterOptions{});
  Rng rng(3);
  reg.run_phase(ProtocolPhase::Initialization, rng);
  const Operator before = reg.nuclear_state(1);
  reg.run_phase(ProtocolPhase::Readout, rng, 0);
  CHECK((reg.nuclear_state(1) - before).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("storage coherence ratio follows the configured T2 values") {
  RegisterOptions o;
  o.relaxation.plus.t2_n = 25000.0;
  o.relaxation.minus.t2_n = 1250.0;
  const double ratio = storage_coherence_ratio(o, Isotope::N15, 15000.0);
  CHECK(ratio == doctest::Approx(std::exp(15.0 * (1 / 1.25 - 1 / 25.0))).epsilon(1e-10));
}

TEST_CASE("phase preconditions and capabilities") {
  CHECK_THROWS_AS(Register(std::vector<Node>{{"A", Eigen::Vector3d::Zero(), Isotope::N15}}, RegisterOptions{}),
                  Error);
  std::vector<Node> three = pair_at(Eigen::Vector3d(10, 0, 0));
  three.push_back({"C", Eigen::Vector3d(20, 0, 0), Isotope::N15});
  try {
    Register r(three, RegisterOptions{});
    FAIL("expected a capability error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Capability);
  }
  Register magic(pair_at(Eigen::Vector3d(5, 5, 5)), RegisterOptions{});
  Rng rng(0);
  CHECK_THROWS_AS(magic.run_phase(ProtocolPhase::Operation, rng), Error);
}

TEST_CASE("protocol runs are deterministic") {
  RegisterOptions o;
  o.relaxation.plus.t2_n = 25000.0;
  o.relaxation.minus.t2_n = 1250.0;
  auto run = [&] {
    Register reg(pair_at(Eigen::Vector3d(10, 0, 0)), o);
    Rng rng(derive_seed(5, "protocol"));
    reg.run_phase(ProtocolPhase::Initialization, rng);
    reg.run_phase(ProtocolPhase::Operation, rng);
    const auto a = reg.run_phase(ProtocolPhase::Readout, rng, 0);
    const auto b = reg.run_phase(ProtocolPhase::Readout, rng, 1);
    return std::vector<int>{a.front().outcome, b.front().outcome};
  };
  CHECK(run() == run());
}

}

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
#include "nvsim/physics.hpp"

using namespace nvsim;

TEST_SUITE("physics") {

TEST_CASE("spin operators satisfy the angular momentum algebra") {
  for (double s : {0.5, 1.0, 1.5}) {
    const SpinOperators op = spin_operators(s);
    const Operator comm = op.sx * op.sy - op.sy * op.sx;
    CHECK((comm - Complex(0, 1) * op.sz).cwiseAbs().maxCoeff() < 1e-12);
    const Operator s2 = op.sx * op.sx + op.sy * op.sy + op.sz * op.sz;
    CHECK((s2 - s * (s + 1) * identity(op.dim())).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(op.sz(0, 0).real() == doctest::Approx(s));
  }
  CHECK_THROWS_AS(spin_operators(0.3), Error);
}

TEST_CASE("partial trace of a product state returns the factors") {
  Operator a(2, 2), b(3, 3);
  a << 0.25, Complex(0, 0.1), Complex(0, -0.1), 0.75;
  b = Operator::Zero(3, 3);
  b(0, 0) = 0.5;
  b(2, 2) = 0.5;
  const Operator ab = kron(a, b);
  const int dims[] = {2, 3};
  const int first[] = {0};
  const int second[] = {1};
  CHECK((partial_trace(ab, dims, first) - a).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((partial_trace(ab, dims, second) - b).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("Hamiltonians are Hermitian with the expected dimensions") {
  const PhysicalParams p;
  struct Expect {
    ChargeState c;
    Isotope i;
    int dim;
  };
  for (const Expect e : {Expect{ChargeState::Minus, Isotope::N14, 9}, Expect{ChargeState::Minus, Isotope::N15, 6},
                         Expect{ChargeState::Zero, Isotope::N14, 6}, Expect{ChargeState::Zero, Isotope::N15, 4},
                         Expect{ChargeState::Plus, Isotope::N14, 3}, Expect{ChargeState::Plus, Isotope::N15, 2}}) {
    const Operator h = build_hamiltonian(e.c, e.i, p);
    CHECK(h.rows() == e.dim);
    CHECK(is_hermitian(h));
  }
}

TEST_CASE("closed-form Rabi ratio matches direct evaluation") {
  const PhysicalParams p;
  const auto& n = p.n15;
  const double d = p.zero_field_splitting;
  const double ez = p.gamma_e * p.b_z;
  const double direct = 1.0 + (p.gamma_e / n.gamma_n) * 2.0 * n.a_perp * d / (ez * ez - d * d);
  CHECK(rabi_ratio_closed_form(p) == doctest::Approx(direct).epsilon(1e-12));
  CHECK(std::abs(rabi_ratio_closed_form(p) / 1.832 - 1.0) < 1e-3);
}

TEST_CASE("NV+ nuclear lines follow quadrupole plus Zeeman") {
  const PhysicalParams p;
  const double zeeman = p.n14.gamma_n * p.b_z;
  const auto lines = nmr_transition_frequencies(ChargeState::Plus, Isotope::N14, Projection{0}, p);
  REQUIRE(lines.size() == 2);
  for (const auto& l : lines) {
    // E(m) = Q m^2 + gamma B m for a bare nucleus.
    const double m1 = l.upper.value(), m0 = l.lower.value();
    const double expected = p.q_plus * (m1 * m1 - m0 * m0) + zeeman * (m1 - m0);
    CHECK(l.frequency == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("NV- ms=0 lines carry only the second-order hyperfine shift") {
  const PhysicalParams p;
  const auto lines = nmr_transition_frequencies(ChargeState::Minus, Isotope::N15, Projection{0}, p);
  REQUIRE(lines.size() == 1);
  const double bare = p.n15.gamma_n * p.b_z;
  const double shift = hyperfine_shift_second_order(ChargeState::Minus, Isotope::N15, Projection{0}, Projection{1}, p) -
                       hyperfine_shift_second_order(ChargeState::Minus, Isotope::N15, Projection{0}, Projection{-1}, p);
  // Perturbation theory agrees with exact diagonalisation to well below a kHz.
  CHECK(std::abs(lines[0].frequency - std::abs(bare + shift)) < 1e-4);
}

TEST_CASE("eigenstate labels recover product states") {
  const PhysicalParams p;
  const Eigensystem eig = diagonalize(build_hamiltonian(ChargeState::Minus, Isotope::N14, p));
  for (int ms : {2, 0, -2}) {
    for (int mi : {2, 0, -2}) {
      const int idx = eigenstate_index(eig, ChargeState::Minus, Isotope::N14, Projection{ms}, Projection{mi});
      const ProductLabel label = dominant_label(eig.vectors.col(idx), ChargeState::Minus, Isotope::N14);
      CHECK(label.ms.twice == ms);
      CHECK(label.mi.twice == mi);
    }
  }
}

TEST_CASE("dressed states agree with exact eigenvectors") {
  const PhysicalParams p;
  const Eigensystem eig = diagonalize(build_hamiltonian(ChargeState::Minus, Isotope::N15, p));
  const auto [up, down] = dressed_states_first_order(p);
  const int iu = eigenstate_index(eig, ChargeState::Minus, Isotope::N15, Projection{0}, Projection{1});
  const int id = eigenstate_index(eig, ChargeState::Minus, Isotope::N15, Projection{0}, Projection{-1});
  CHECK(infidelity(eig.vectors.col(iu), up) <= 1e-4);
  CHECK(infidelity(eig.vectors.col(id), down) <= 1e-4);
}

TEST_CASE("quadrupole and field gradient conversions are inverse and linear") {
  const double vzz = efg_from_quadrupole(-4.92, 0.02);
  CHECK(quadrupole_from_efg(vzz, 0.02) == doctest::Approx(-4.92).epsilon(1e-12));
  CHECK(quadrupole_from_efg(vzz, 0.04) == doctest::Approx(-9.84).epsilon(1e-12));
}

TEST_CASE("second-order shift vanishes without an electron") {
  const PhysicalParams p;
  CHECK(hyperfine_shift_second_order(ChargeState::Plus, Isotope::N14, Projection{0}, Projection{2}, p) == 0.0);
}

}

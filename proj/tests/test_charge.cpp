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
#include "nvsim/charge_model.hpp"

using namespace nvsim;

namespace {

double logistic(double u) { return 1.0 / (1.0 + std::exp(u)); }

}  // namespace

TEST_SUITE("charge") {

TEST_CASE("steady state follows the double sigmoid") {
  const VoltageProfile prof;
  for (double v = -10.0; v <= 10.0; v += 0.5) {
    const ChargeDistribution d = steady_state_distribution(v, prof);
    const double s1 = logistic((v - prof.v_minus_zero) / prof.width1);
    const double s2 = logistic(-(v - prof.v_zero_plus) / prof.width2);
    const double w_plus = prof.w_plus_max * s2;
    CHECK(d.w_plus == doctest::Approx(w_plus).epsilon(1e-12));
    CHECK(d.w_minus == doctest::Approx((1.0 - w_plus) * prof.w_minus_max * s1).epsilon(1e-12));
    CHECK(d.w_minus + d.w_zero + d.w_plus == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(d.w_zero >= 0.0);
  }
}

TEST_CASE("settling is exponential towards the steady state") {
  const VoltageProfile prof;
  const ChargeDistribution start{0.7, 0.3, 0.0};
  const ChargeDistribution ss = steady_state_distribution(8.0, prof);
  for (double t : {0.0, 100.0, 540.0, 3000.0}) {
    const ChargeDistribution d = settle(start, 8.0, t, prof);
    const double e = std::exp(-t / prof.settle_tau);
    CHECK(d.w_plus == doctest::Approx(ss.w_plus + (start.w_plus - ss.w_plus) * e).epsilon(1e-12));
    CHECK(d.w_minus == doctest::Approx(ss.w_minus + (start.w_minus - ss.w_minus) * e).epsilon(1e-12));
  }
}

TEST_CASE("charge switching keeps the nuclear state") {
  Operator nuc(3, 3);
  nuc << 0.5, 0.1, Complex(0, 0.05), 0.1, 0.3, 0.0, Complex(0, -0.05), 0.0, 0.2;
  for (ChargeState to : kAllChargeStates) {
    for (ElectronAttachment a : {ElectronAttachment::MaximallyMixed, ElectronAttachment::Ground}) {
      const Operator switched = switch_charge(nuc, ChargeState::Plus, to, Isotope::N14, a);
      CHECK(switched.rows() == layout_for(to, Isotope::N14).dim());
      CHECK((nuclear_reduced(switched, to, Isotope::N14) - nuc).cwiseAbs().maxCoeff() < 1e-14);
    }
  }
}

TEST_CASE("ground attachment puts NV- in mS = 0") {
  const Operator e = electron_attachment_state(ChargeState::Minus, ElectronAttachment::Ground);
  CHECK(e(1, 1).real() == doctest::Approx(1.0));
  const Operator m = electron_attachment_state(ChargeState::Zero, ElectronAttachment::MaximallyMixed);
  CHECK(m(0, 0).real() == doctest::Approx(0.5));
}

TEST_CASE("telegraph sampler converges to the steady state") {
  const VoltageProfile prof;
  TelegraphSampler s(42, ChargeState::Minus);
  const ChargeDistribution ss = steady_state_distribution(-8.0, prof);
  const int n = 20000;
  int minus = 0;
  for (int i = 0; i < n; ++i) {
    if (s.advance(-8.0, 10.0 * prof.settle_tau, prof) == ChargeState::Minus) ++minus;
  }
  const double sigma = std::sqrt(ss.w_minus * (1 - ss.w_minus) / n);
  CHECK(std::abs(minus / double(n) - ss.w_minus) < 4 * sigma);
}

TEST_CASE("depletion radius is a power law") {
  const double r1 = depletion_radius(2.0, 1e13);
  const double r2 = depletion_radius(4.0, 1e13);
  CHECK(r2 / r1 == doctest::Approx(std::pow(2.0, 0.75)).epsilon(1e-12));
  const double k = depletion_prefactor(3.0, 5.0, 1e13, 0.75, 0.75);
  const double h = 1e-6;
  const double slope =
      (depletion_radius(5.0 + h, 1e13, 0.75, 0.75, k) - depletion_radius(5.0 - h, 1e13, 0.75, 0.75, k)) / (2 * h);
  CHECK(slope == doctest::Approx(3.0).epsilon(1e-6));
}

}

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
#include "nvsim/config.hpp"
#include "nvsim/executor.hpp"

using namespace nvsim;

namespace {

CompiledSchedule compile_text(const char* text, const Config& c, const Bindings& b = {}) {
  return compile(parse_program(text), c.compile_options(), b);
}

}  // namespace

TEST_SUITE("executor") {

TEST_CASE("readout signal maps flips affinely") {
  const ReadoutModel m;
  CHECK(signal_from_flip_probability(0.0, m) == doctest::Approx(0.3));
  CHECK(signal_from_flip_probability(1.0, m) == doctest::Approx(0.7));
  CHECK(flip_probability_from_signal(0.5, m) == doctest::Approx(0.5));
  CHECK(m.fidelity() == doctest::Approx(0.7));
}

TEST_CASE("shot estimates are unbiased with binomial errors") {
  const ReadoutModel m;
  Rng rng(7);
  const int reps = 2000;
  double sum = 0.0, sum2 = 0.0, err = 0.0;
  for (int i = 0; i < reps; ++i) {
    const ShotEstimate e = sample_shots(0.4, m, 1000, rng);
    sum += e.flip;
    sum2 += e.flip * e.flip;
    err += e.flip_stderr;
  }
  const double mean = sum / reps;
  const double sd = std::sqrt(sum2 / reps - mean * mean);
  const double q = 0.3 + 0.4 * 0.4;
  const double expected_sd = std::sqrt(q * (1 - q) / 1000) / 0.4;
  CHECK(std::abs(mean - 0.4) < 4 * expected_sd / std::sqrt(double(reps)));
  CHECK(sd == doctest::Approx(expected_sd).epsilon(0.05));
  CHECK(err / reps == doctest::Approx(expected_sd).epsilon(0.02));
}

TEST_CASE("laser init and immediate readout give no flips") {
  const Config c = default_config();
  const Executor ex(c.executor_options(), Isotope::N15);
  const auto r = ex.run(compile_text("isotope n15\nlaser init\nreadout nuclear\n", c));
  REQUIRE(r.readouts.size() == 1);
  CHECK(r.readouts[0].flip_probability == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.readouts[0].charge.w_minus == doctest::Approx(0.7));
  CHECK(r.readouts[0].charge.w_zero == doctest::Approx(0.3));
}

TEST_CASE("charge weights settle exponentially during waits") {
  const Config c = default_config();
  const Executor ex(c.executor_options(), Isotope::N15);
  const auto r = ex.run(compile_text("isotope n15\nlaser init\nvoltage 8 V\nwait 1 ms\nreadout nuclear\n", c));
  const ChargeDistribution expected = settle(ChargeDistribution{0.7, 0.3, 0.0}, 8.0, 1000.0, c.profile);
  CHECK(r.final_charge.w_plus == doctest::Approx(expected.w_plus).epsilon(1e-12));
  CHECK(r.final_charge.w_minus == doctest::Approx(expected.w_minus).epsilon(1e-12));
}

TEST_CASE("ideal selective pi pulse flips exactly the addressed fraction") {
  const Config c = default_config();
  const Executor ex(c.executor_options(GateModel::IdealSelective), Isotope::N15);
  // Coherent storage and no guard, so nuclear T1 in NV+ does not enter.
  const char* prog = R"(isotope n15
guard 0 ms
transition nmr nuclear ms=0 +1/2 -1/2 in plus
laser init
voltage 8 V
evolve 20 ms
rf pi on nmr
voltage -8 V
readout nuclear
)";
  const auto r = ex.run(compile_text(prog, c));
  const ChargeDistribution ss = steady_state_distribution(8.0, c.profile);
  // The NV- mS=0 line coincides with the NV+ line within the selectivity window.
  CHECK(r.readouts[0].flip_probability == doctest::Approx(ss.w_plus + ss.w_minus).epsilon(1e-6));
}

TEST_CASE("trajectories average to the ensemble") {
  Config c = default_config();
  const Executor ex(c.executor_options(), Isotope::N15);
  const char* prog = R"(isotope n15
transition nmr nuclear ms=0 +1/2 -1/2 in plus
laser init
voltage 8 V
wait 0.5 ms
rf pi on nmr
voltage -8 V
readout nuclear
)";
  const CompiledSchedule s = compile(parse_program(prog), [&] {
    CompileOptions o = c.compile_options();
    o.guard = 0;
    return o;
  }());
  const double exact = ex.run(s).readouts[0].flip_probability;
  Rng rng(11);
  const int n = 4000;
  int flipped = 0;
  for (int i = 0; i < n; ++i) {
    const TrajectoryResult t = ex.run_trajectory(s, rng);
    if (t.measured[0].twice != ex.initial_projection().twice) ++flipped;
  }
  const double sigma = std::sqrt(exact * (1 - exact) / n);
  CHECK(std::abs(flipped / double(n) - exact) < 4 * sigma);
}

TEST_CASE("schedule isotope must match") {
  const Config c = default_config();
  const Executor ex(c.executor_options(), Isotope::N14);
  CHECK_THROWS_AS(ex.run(compile_text("isotope n15\nlaser init\n", c)), Error);
}

}

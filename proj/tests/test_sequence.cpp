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
#include "nvsim/sequence.hpp"

using namespace nvsim;

namespace {

const char* kSmall = R"(program small
isotope n15
amplitude b1 5 mT
transition nmr nuclear ms=0 +1/2 -1/2 in plus
sweep T in [10, 20] us
sweep U in [6, 8] V
laser init
voltage $U
wait 2 ms
rf for $T on nmr amplitude b1 phase 90 deg
readout nuclear
)";

int error_line(const std::string& text) {
  try {
    parse_program(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_SUITE("sequence") {

TEST_CASE("every template survives print and parse") {
  for (const auto& [name, prog] : builtin_templates()) {
    const std::string printed = print_program(prog);
    CHECK(parse_program(printed) == prog);
    CHECK(print_program(parse_program(printed)) == printed);
  }
}

TEST_CASE("sweeps expand as a cartesian product, first sweep slowest") {
  const PulseProgram p = parse_program(kSmall);
  const auto b = expand_sweeps(p);
  REQUIRE(b.size() == 4);
  CHECK(b[0].at("T").value == 10);
  CHECK(b[0].at("U").value == 6);
  CHECK(b[1].at("U").value == 8);
  CHECK(b[2].at("T").value == 20);
}

TEST_CASE("compiled schedule has contiguous segments") {
  const PulseProgram p = parse_program(kSmall);
  const CompileOptions opt;
  const CompiledSchedule s = compile(p, opt, expand_sweeps(p)[3]);
  double t = 0;
  for (const auto& seg : s.segments) {
    CHECK(seg.start == doctest::Approx(t));
    t = seg.start + seg.duration;
  }
  CHECK(s.total_duration == doctest::Approx(2000 + 20));
  const auto it = std::find_if(s.segments.begin(), s.segments.end(),
                               [](const Segment& g) { return g.kind == SegmentKind::Driven; });
  REQUIRE(it != s.segments.end());
  CHECK(it->drive->phase == doctest::Approx(kPi / 2));
  CHECK(it->drive->charge == ChargeState::Plus);
  CHECK(it->drive->frequency == doctest::Approx(std::abs(opt.params.n15.gamma_n * opt.params.b_z)));
}

TEST_CASE("pi pulses take half a Rabi period") {
  const PulseProgram p = parse_program(R"(isotope n15
transition nmr nuclear ms=0 +1/2 -1/2 in plus
rf pi on nmr
)");
  CompileOptions opt;
  opt.rf_amplitude = 2e-3;
  const CompiledSchedule s = compile(p, opt);
  const double rabi = 0.5 * std::abs(opt.params.n15.gamma_n) * 2e-3;
  CHECK(s.segments.front().duration == doctest::Approx(0.5 / rabi).epsilon(1e-9));
}

TEST_CASE("parse errors carry the line") {
  CHECK(error_line("program x\nwait 5 parsecs\n") == 2);
  CHECK(error_line("program x\n\nrf pi on nowhere\n") == 3);
  CHECK(error_line("voltage $Q\n") == 1);
  CHECK(error_line("transition t nuclear ms=0 +1 -1\n") == 1);
  CHECK(error_line("laser init at 1 us\nlaser init at 1 us\n") == 2);
  CHECK(error_line("frobnicate\n") == 1);
}

TEST_CASE("compile rejects guard violations and unbound variables") {
  const PulseProgram p = parse_program(R"(isotope n15
transition nmr nuclear ms=0 +1/2 -1/2
voltage 8 V
wait 1 ms
rf pi on nmr
)");
  CHECK_THROWS_AS(compile(p, CompileOptions{}), Error);
  const PulseProgram q = parse_program(kSmall);
  CHECK_THROWS_AS(compile(q, CompileOptions{}), Error);
}

TEST_CASE("low-weight charge states produce a warning") {
  const PulseProgram p = parse_program(R"(isotope n15
transition nmr nuclear ms=0 +1/2 -1/2 in plus
voltage -8 V
wait 2 ms
rf pi on nmr
)");
  const CompiledSchedule s = compile(p, CompileOptions{});
  CHECK(s.warnings.size() == 1);
}

TEST_CASE("unit conversions") {
  CHECK(time_us({1.5, "ms"}) == 1500.0);
  CHECK(time_us({2, "s"}) == 2e6);
  CHECK(volts({250, "mV"}) == 0.25);
  CHECK(tesla({5, "mT"}) == 0.005);
  CHECK(parse_angle("pi/2") == doctest::Approx(kPi / 2));
  CHECK(parse_angle("3pi/2") == doctest::Approx(1.5 * kPi));
  CHECK(parse_angle("90deg") == doctest::Approx(kPi / 2));
  CHECK_THROWS_AS(time_us({1, "V"}), Error);
}

}

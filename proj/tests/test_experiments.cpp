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
#include "json.hpp"
#include "nvsim/experiments.hpp"

using namespace nvsim;

TEST_SUITE("experiments") {

TEST_CASE("CSV quoting") {
  Table t{{"name", "value"}, {{std::string("a,b"), 1.5}, {std::string("say \"hi\""), -2.0}}};
  CHECK(to_csv(t) == "name,value\n\"a,b\",1.5\n\"say \"\"hi\"\"\",-2\n");
}

TEST_CASE("JSON summary has a stable key order") {
  ExperimentResult r;
  r.name = "x";
  r.reported.push_back({"tau", "ms", 1.0, 0.1, 0.8, 1.2, ""});
  r.checks.push_back({"c", 1.0, 1.0, 0.1, true, ""});
  const auto j = nlohmann::ordered_json::parse(to_json(r));
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"name", "seed", "shots", "reported", "checks", "passed", "notes",
                                         "warnings", "table"});
  CHECK(j["passed"] == true);
}

TEST_CASE("flat data report no decay") {
  FitResult f;
  f.params = {0.5, 0.0, 0.0};
  f.errors = {0, 0, 0};
  f.ci_low = {0, 0, 0};
  f.ci_high = {0, 0, 0};
  const Reported r = decay_time("t2", f, 2, "ms", 1.0);
  CHECK(r.note == "no decay");
  CHECK(std::isinf(r.value));
}

TEST_CASE("program runs report one row per readout and binding") {
  const Config c = default_config();
  const PulseProgram p = parse_program(R"(program two
isotope n15
transition nmr nuclear ms=0 +1/2 -1/2 in plus
sweep U in [6, 8, 10] V
laser init
voltage $U
wait 3 ms
rf pi on nmr
voltage -8 V
readout nuclear
)");
  const ExperimentResult r = run_program(c, p, 0);
  REQUIRE(r.table.rows.size() == 3);
  CHECK(r.table.columns.front() == "U_V");
  const double f8 = std::get<double>(r.table.rows[1][3]);
  CHECK(f8 > 0.9);
}

TEST_CASE("identical configurations give identical output") {
  Config c = default_config();
  c.seed = 3;
  const auto a = run_settling_scan(c, {}, 200);
  const auto b = run_settling_scan(c, {}, 200);
  CHECK(to_json(a) == to_json(b));
  CHECK(to_csv(a.table) == to_csv(b.table));
  c.seed = 4;
  CHECK(to_csv(run_settling_scan(c, {}, 200).table) != to_csv(a.table));
}

TEST_CASE("scenario parsing") {
  const ProtocolScenario s = parse_scenario(R"(
nodes:
  - {id: left, position_nm: [0, 0, 0], isotope: n15}
  - {id: right, position_nm: [12, 0, 0], isotope: n15}
noiseless: true
steps:
  - phase: initialization
  - phase: operation
  - wait_ms: 3
  - phase: readout
    node: right
)");
  CHECK(s.nodes.size() == 2);
  CHECK(s.noiseless);
  REQUIRE(s.steps.size() == 4);
  CHECK(s.steps[2].kind == ProtocolStep::Kind::Wait);
  CHECK(s.steps[2].wait == doctest::Approx(3000.0));
  CHECK(s.steps[3].node == 1);
  const ExperimentResult r = run_protocol(default_config(), s);
  CHECK(r.passed());
}

TEST_CASE("scenario errors") {
  auto code = [](const char* y) {
    try {
      parse_scenario(y);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  CHECK(code("nodes:\n  - {id: a}\n") == ErrorCode::Config);
  CHECK(code("nodes:\n  - {id: a, position_nm: [0,0,0]}\n  - {id: b, position_nm: [1,0,0]}\n  - {id: c, "
             "position_nm: [2,0,0]}\n") == ErrorCode::Capability);
  CHECK(code("nodes:\n  - {id: a, position_nm: [0,0,0]}\n  - {id: b, position_nm: [1,0,0]}\nsteps:\n  - phase: "
             "dance\n") == ErrorCode::Config);
  CHECK(code("nodes:\n  - {id: a, position_nm: [0,0,0]}\n  - {id: b, position_nm: [1,0,0]}\ncolour: red\n") ==
        ErrorCode::Config);
}

TEST_CASE("N15 spectroscopy reports not applicable") {
  Config c = default_config();
  c.spectroscopy.isotope = Isotope::N15;
  const ExperimentResult r = run_quadrupole_spectroscopy(c);
  CHECK(r.passed());
  CHECK(std::get<std::string>(r.table.rows[0][6]) == "not applicable");
}

TEST_CASE("experiment names dispatch") {
  for (const auto& n : experiment_names()) CHECK(!n.empty());
  CHECK_THROWS_AS(run_experiment("nonsense", default_config()), Error);
}

}

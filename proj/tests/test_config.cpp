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

#include <fstream>

#include "doctest.h"
#include "nvsim/config.hpp"

using namespace nvsim;

namespace {

ErrorCode code_of(const std::string& yaml) {
  try {
    parse_config(yaml);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

std::string message_of(const std::string& yaml) {
  try {
    parse_config(yaml);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("empty document gives the defaults") {
  const Config c = parse_config("");
  const Config d = default_config();
  CHECK(c.params.b_z == d.params.b_z);
  CHECK(c.relaxation.plus.t2_n == 25000.0);
  CHECK(c.relaxation.minus.t2_n == 1250.0);
  CHECK(c.relaxation.plus.t1_n == 300000.0);
  CHECK(c.relaxation.plus.rabi_decay == 22000.0);
  CHECK(c.profile.settle_tau == 540.0);
  CHECK(c.seed == 0);
}

TEST_CASE("values are read in their suffixed units") {
  const Config c = parse_config(R"(
physics:
  b_z_mt: 300
relaxation:
  plus:
    t2_n_ms: 12.5
charge:
  settle_tau_ms: 0.6
sequence:
  rf_amplitude_mt: 2
seed: 9
)");
  CHECK(c.params.b_z == doctest::Approx(0.3));
  CHECK(c.relaxation.plus.t2_n == doctest::Approx(12500.0));
  CHECK(c.profile.settle_tau == doctest::Approx(600.0));
  CHECK(c.rf_amplitude == doctest::Approx(2e-3));
  CHECK(c.seed == 9);
}

TEST_CASE("unknown keys, wrong types and bad values are rejected") {
  CHECK(code_of("physics:\n  b_field: 1\n") == ErrorCode::Config);
  CHECK(message_of("physics:\n  b_field: 1\n").find("b_field") != std::string::npos);
  CHECK(code_of("charge:\n  settle_tau_ms: fast\n") == ErrorCode::Config);
  CHECK(code_of("charge:\n  settle_tau_ms: -1\n") == ErrorCode::Config);
  CHECK(code_of("relaxation:\n  plus:\n    t1_n_ms: 10\n    t2_n_ms: 100\n") == ErrorCode::Config);
  CHECK(code_of("readout: [1, 2]\n") == ErrorCode::Config);
  CHECK(code_of("a: [\n") == ErrorCode::Config);
}

TEST_CASE("dump and parse round trip") {
  Config c = default_config();
  c.relaxation.zero.t1_e = 123.0;
  c.seed = 77;
  c.scan_voltages = {-3, 0, 3};
  const Config back = parse_config(dump_config(c));
  CHECK(dump_config(back) == dump_config(c));
  CHECK(back.relaxation.zero.t1_e == doctest::Approx(123.0));
}

TEST_CASE("shipped configuration files load") {
  const Config d = load_config(NVSIM_SOURCE_DIR "/config/defaults.yaml");
  CHECK(dump_config(d) == dump_config(default_config()));
  const Config m = load_config(NVSIM_SOURCE_DIR "/config/nv-minus-10ms.yaml");
  CHECK(m.relaxation.minus.t2_n == doctest::Approx(10000.0));
}

TEST_CASE("missing files are I/O errors") {
  try {
    load_config("/nonexistent/cfg.yaml");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Io);
  }
}

}

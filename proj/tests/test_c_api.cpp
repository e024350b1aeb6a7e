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

#include <cstring>
#include <string>

#include "doctest.h"
#include "nvsim/nvsim.h"

TEST_SUITE("c_api") {

TEST_CASE("experiment through the C interface") {
  nvsim_config* c = nullptr;
  REQUIRE(nvsim_config_default(&c) == NVSIM_OK);
  CHECK(nvsim_config_set_shots(c, 0) == NVSIM_OK);
  nvsim_result* r = nullptr;
  REQUIRE(nvsim_run_experiment(c, "settle", &r) == NVSIM_OK);
  CHECK(nvsim_result_passed(r) == 1);
  CHECK(std::string(nvsim_result_csv(r)).rfind("series,x_ms", 0) == 0);
  CHECK(std::string(nvsim_result_json(r)).find("\"name\": \"settle\"") != std::string::npos);
  nvsim_result_free(r);
  nvsim_config_free(c);
}

TEST_CASE("errors map to status codes with messages") {
  nvsim_config* c = nullptr;
  CHECK(nvsim_config_load("/nonexistent.yaml", &c) == NVSIM_IO);
  CHECK(std::strlen(nvsim_last_error()) > 0);
  REQUIRE(nvsim_config_default(&c) == NVSIM_OK);
  nvsim_result* r = nullptr;
  CHECK(nvsim_run_program_text(c, "wait 3 parsecs\n", &r) == NVSIM_PARSE);
  CHECK(std::string(nvsim_last_error()).find("line 1") != std::string::npos);
  CHECK(nvsim_run_program_file(c, "/nonexistent.pseq", &r) == NVSIM_IO);
  CHECK(std::string(nvsim_last_error()).find("/nonexistent.pseq") != std::string::npos);
  CHECK(nvsim_run_experiment(c, "nonsense", &r) == NVSIM_INVALID_ARGUMENT);
  CHECK(nvsim_run_experiment(nullptr, "rabi", &r) == NVSIM_INVALID_ARGUMENT);
  CHECK(nvsim_config_set_shots(c, -1) == NVSIM_INVALID_ARGUMENT);
  CHECK(nvsim_result_passed(nullptr) == -1);
  nvsim_config_free(c);
}

TEST_CASE("selftest passes") {
  nvsim_config* c = nullptr;
  REQUIRE(nvsim_config_default(&c) == NVSIM_OK);
  nvsim_result* r = nullptr;
  REQUIRE(nvsim_selftest(c, &r) == NVSIM_OK);
  CHECK(nvsim_result_passed(r) == 1);
  nvsim_result_free(r);
  nvsim_config_free(c);
}

}

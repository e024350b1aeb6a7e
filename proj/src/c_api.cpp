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

#include "nvsim/nvsim.h"

#include <fstream>
#include <new>
#include <sstream>
#include <string>

#include "nvsim/experiments.hpp"
#include "nvsim/selftest.hpp"

struct nvsim_config {
  nvsim::Config config;
};

struct nvsim_result {
  nvsim::ExperimentResult result;
  std::string json;
  std::string csv;
};

namespace {

thread_local std::string last_error;

nvsim_status status_for(nvsim::ErrorCode code) {
  using nvsim::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::DimensionMismatch:
      return NVSIM_INVALID_ARGUMENT;
    case ErrorCode::Singular:
    case ErrorCode::NotHermitian:
    case ErrorCode::Fit:
      return NVSIM_NUMERIC;
    case ErrorCode::Parse:
      return NVSIM_PARSE;
    case ErrorCode::Compile:
      return NVSIM_COMPILE;
    case ErrorCode::Config:
      return NVSIM_CONFIG;
    case ErrorCode::Capability:
      return NVSIM_CAPABILITY;
    case ErrorCode::Io:
      return NVSIM_IO;
  }
  return NVSIM_INTERNAL;
}

template <typename F>
nvsim_status guarded(F&& fn) {
  last_error.clear();
  try {
    fn();
    return NVSIM_OK;
  } catch (const nvsim::Error& e) {
    last_error = e.what();
    return status_for(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown error";
  }
  return NVSIM_INTERNAL;
}

nvsim_status missing(const char* what) {
  last_error = std::string(what) + " is null";
  return NVSIM_INVALID_ARGUMENT;
}

nvsim_status finish(nvsim::ExperimentResult r, nvsim_result** out) {
  auto* h = new nvsim_result{std::move(r), {}, {}};
  h->json = nvsim::to_json(h->result);
  h->csv = nvsim::to_csv(h->result.table);
  *out = h;
  return NVSIM_OK;
}

std::string read_file(const char* path) {
  std::ifstream in(path);
  if (!in) throw nvsim::Error(nvsim::ErrorCode::Io, std::string("cannot read '") + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

extern "C" {

const char* nvsim_version(void) { return "0.1.0"; }

const char* nvsim_last_error(void) { return last_error.c_str(); }

nvsim_status nvsim_config_default(nvsim_config** out) {
  if (!out) return missing("out");
  return guarded([&] { *out = new nvsim_config{nvsim::default_config()}; });
}

nvsim_status nvsim_config_load(const char* path, nvsim_config** out) {
  if (!path) return missing("path");
  if (!out) return missing("out");
  return guarded([&] { *out = new nvsim_config{nvsim::load_config(path)}; });
}

nvsim_status nvsim_config_set_seed(nvsim_config* config, uint64_t seed) {
  if (!config) return missing("config");
  config->config.seed = seed;
  return NVSIM_OK;
}

nvsim_status nvsim_config_set_shots(nvsim_config* config, int shots) {
  if (!config) return missing("config");
  if (shots < 0) {
    last_error = "shots must be >= 0";
    return NVSIM_INVALID_ARGUMENT;
  }
  config->config.readout.shots = shots;
  return NVSIM_OK;
}

const char* nvsim_config_output_dir(const nvsim_config* config) {
  return config ? config->config.output_dir.c_str() : nullptr;
}

void nvsim_config_free(nvsim_config* config) { delete config; }

nvsim_status nvsim_run_experiment(const nvsim_config* config, const char* name, nvsim_result** out) {
  if (!config) return missing("config");
  if (!name) return missing("name");
  if (!out) return missing("out");
  nvsim_status st = NVSIM_OK;
  const nvsim_status g = guarded([&] { st = finish(nvsim::run_experiment(name, config->config), out); });
  return g != NVSIM_OK ? g : st;
}

nvsim_status nvsim_run_program_text(const nvsim_config* config, const char* text, nvsim_result** out) {
  if (!config) return missing("config");
  if (!text) return missing("text");
  if (!out) return missing("out");
  return guarded([&] {
    const nvsim::PulseProgram prog = nvsim::parse_program(text);
    finish(nvsim::run_program(config->config, prog, config->config.readout.shots), out);
  });
}

nvsim_status nvsim_run_program_file(const nvsim_config* config, const char* path, nvsim_result** out) {
  if (!config) return missing("config");
  if (!path) return missing("path");
  if (!out) return missing("out");
  return guarded([&] {
    const std::string text = read_file(path);
    nvsim::PulseProgram prog;
    try {
      prog = nvsim::parse_program(text);
    } catch (const nvsim::Error& e) {
      throw nvsim::Error(e.code(), std::string(path) + ": " + e.what());
    }
    finish(nvsim::run_program(config->config, prog, config->config.readout.shots), out);
  });
}

nvsim_status nvsim_run_protocol_file(const nvsim_config* config, const char* path, nvsim_result** out) {
  if (!config) return missing("config");
  if (!path) return missing("path");
  if (!out) return missing("out");
  return guarded([&] { finish(nvsim::run_protocol(config->config, nvsim::load_scenario(path)), out); });
}

nvsim_status nvsim_selftest(const nvsim_config* config, nvsim_result** out) {
  if (!config) return missing("config");
  if (!out) return missing("out");
  return guarded([&] { finish(nvsim::run_selftest(config->config), out); });
}

int nvsim_result_passed(const nvsim_result* result) {
  if (!result) return -1;
  return result->result.passed() ? 1 : 0;
}

const char* nvsim_result_json(const nvsim_result* result) { return result ? result->json.c_str() : nullptr; }

const char* nvsim_result_csv(const nvsim_result* result) { return result ? result->csv.c_str() : nullptr; }

void nvsim_result_free(nvsim_result* result) { delete result; }

}  // extern "C"

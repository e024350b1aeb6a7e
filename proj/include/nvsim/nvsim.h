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

/* C interface to the nvsim library. All functions return a status code and
 * report details through nvsim_last_error() (per thread). Strings returned
 * by the library are owned by the handle they came from. */
#ifndef NVSIM_NVSIM_H
#define NVSIM_NVSIM_H

#include <stdint.h>

#if defined(NVSIM_BUILDING_LIBRARY)
#define NVSIM_API __attribute__((visibility("default")))
#else
#define NVSIM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nvsim_status {
  NVSIM_OK = 0,
  NVSIM_INVALID_ARGUMENT = 1,
  NVSIM_CONFIG = 2,
  NVSIM_PARSE = 3,
  NVSIM_COMPILE = 4,
  NVSIM_IO = 5,
  NVSIM_NUMERIC = 6,
  NVSIM_CAPABILITY = 7,
  NVSIM_INTERNAL = 8
} nvsim_status;

typedef struct nvsim_config nvsim_config;
typedef struct nvsim_result nvsim_result;

NVSIM_API const char* nvsim_version(void);
/* Message of the last failing call on this thread, "" if none. */
NVSIM_API const char* nvsim_last_error(void);

NVSIM_API nvsim_status nvsim_config_default(nvsim_config** out);
NVSIM_API nvsim_status nvsim_config_load(const char* path, nvsim_config** out);
NVSIM_API nvsim_status nvsim_config_set_seed(nvsim_config* config, uint64_t seed);
/* 0 selects exact probabilities. */
NVSIM_API nvsim_status nvsim_config_set_shots(nvsim_config* config, int shots);
/* Directory from the configuration's output_dir key. */
NVSIM_API const char* nvsim_config_output_dir(const nvsim_config* config);
NVSIM_API void nvsim_config_free(nvsim_config* config);

/* name: scan-charge, rabi, echo, t1, settle, quadrupole, lifetimes, protocol, selftest */
NVSIM_API nvsim_status nvsim_run_experiment(const nvsim_config* config, const char* name, nvsim_result** out);
NVSIM_API nvsim_status nvsim_run_program_file(const nvsim_config* config, const char* path, nvsim_result** out);
NVSIM_API nvsim_status nvsim_run_program_text(const nvsim_config* config, const char* text, nvsim_result** out);
NVSIM_API nvsim_status nvsim_run_protocol_file(const nvsim_config* config, const char* path, nvsim_result** out);
NVSIM_API nvsim_status nvsim_selftest(const nvsim_config* config, nvsim_result** out);

/* 1 when every check passed, 0 otherwise, -1 for a null handle. */
NVSIM_API int nvsim_result_passed(const nvsim_result* result);
NVSIM_API const char* nvsim_result_json(const nvsim_result* result);
NVSIM_API const char* nvsim_result_csv(const nvsim_result* result);
NVSIM_API void nvsim_result_free(nvsim_result* result);

#ifdef __cplusplus
}
#endif

#endif

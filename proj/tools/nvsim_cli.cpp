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

// Command-line front end. Links only the C interface.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "nvsim/nvsim.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitError = 2;

int fail(const char* what) {
  std::cerr << "nvsim: " << what << ": " << nvsim_last_error() << "\n";
  return kExitError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NV-center charge and nuclear-spin dynamics simulator"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  app.set_version_flag("--version", std::string(nvsim_version()));

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> shots;
  std::string output;
  std::string format = "csv";
  bool check = false;

  app.add_option("-c,--config", config_path, "YAML configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "master random seed");
  app.add_option("--shots", shots, "shots per point; 0 gives exact probabilities")->check(CLI::NonNegativeNumber);
  app.add_option("-o,--output", output, "directory for <name>.csv and <name>.json (default: output_dir)");
  app.add_option("-f,--format", format, "format echoed to stdout")->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("--check", check, "exit with status 1 when any built-in check fails");

  struct Named {
    const char* name;
    const char* help;
  };
  const Named experiments[] = {
      {"scan-charge", "charge-state probe against gate voltage"},
      {"rabi", "nuclear Rabi oscillations in NV- and NV+"},
      {"echo", "Hahn echo in NV+ and NV-"},
      {"t1", "nuclear T1 in NV+"},
      {"settle", "charge settling after a voltage step"},
      {"quadrupole", "quadrupole constant from NMR spectroscopy"},
      {"lifetimes", "echo, T1 and long-drive Rabi decay"},
  };
  std::string selected;
  for (const auto& e : experiments) {
    app.add_subcommand(e.name, e.help)->final_callback([&selected, &e] { selected = e.name; });
  }
  std::string scenario_path;
  auto* protocol = app.add_subcommand("protocol", "two-node register protocol");
  protocol->add_option("scenario", scenario_path, "scenario YAML (default: built-in two-node scenario)")
      ->check(CLI::ExistingFile);
  std::string program_path;
  auto* run = app.add_subcommand("run", "execute a pulse program file");
  run->add_option("program", program_path, "pulse program (.pseq)")->required()->check(CLI::ExistingFile);
  auto* selftest = app.add_subcommand("selftest", "numerical invariant checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  nvsim_config* config = nullptr;
  if (config_path.empty() ? nvsim_config_default(&config) : nvsim_config_load(config_path.c_str(), &config)) {
    return fail("configuration");
  }
  if (seed) nvsim_config_set_seed(config, *seed);
  if (shots && nvsim_config_set_shots(config, *shots) != NVSIM_OK) {
    nvsim_config_free(config);
    return fail("--shots");
  }

  if (output.empty()) output = nvsim_config_output_dir(config);
  std::string stem = selected;
  nvsim_result* result = nullptr;
  nvsim_status st;
  if (*protocol) {
    stem = "protocol";
    st = scenario_path.empty() ? nvsim_run_experiment(config, "protocol", &result)
                               : nvsim_run_protocol_file(config, scenario_path.c_str(), &result);
  } else if (*run) {
    stem = std::filesystem::path(program_path).stem().string();
    st = nvsim_run_program_file(config, program_path.c_str(), &result);
  } else if (*selftest) {
    stem = "selftest";
    st = nvsim_selftest(config, &result);
  } else {
    st = nvsim_run_experiment(config, selected.c_str(), &result);
  }
  nvsim_config_free(config);
  if (st != NVSIM_OK) return fail("run failed");

  const std::string csv = nvsim_result_csv(result);
  const std::string json = nvsim_result_json(result);
  const bool passed = nvsim_result_passed(result) == 1;
  nvsim_result_free(result);

  std::error_code ec;
  std::filesystem::create_directories(output, ec);
  for (const auto& [ext, text] : {std::pair{".csv", &csv}, std::pair{".json", &json}}) {
    const std::filesystem::path path = std::filesystem::path(output) / (stem + ext);
    std::ofstream out(path);
    out << *text;
    if (!out) {
      std::cerr << "nvsim: cannot write '" << path.string() << "'\n";
      return kExitError;
    }
  }
  std::cout << (format == "json" ? json : csv);
  if (!passed) std::cerr << "nvsim: one or more checks failed\n";
  return check && !passed ? kExitCheckFailed : kExitOk;
}

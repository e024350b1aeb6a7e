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

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace nvsim {

/// Deterministic stream seed from (master seed, label, index). Uses FNV-1a on
/// the label and splitmix64 to mix.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t index = 0);

/// Seeded random stream. Distributions are implemented here rather than taken
/// from <random> so sequences are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  bool bernoulli(double p);
  double normal();
  double exponential(double rate);
  std::uint64_t binomial(std::uint64_t n, double p);
  std::uint64_t poisson(double mean);
  /// Index drawn from unnormalised non-negative weights.
  int categorical(std::initializer_list<double> weights);

 private:
  std::mt19937_64 engine_;
};

}  // namespace nvsim

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

#include "nvsim/random.hpp"

#include <cmath>

#include "nvsim/types.hpp"

namespace nvsim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t index) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(splitmix64(master ^ h) + index);
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

bool Rng::bernoulli(double p) { return uniform() < p; }

double Rng::normal() {
  // Box-Muller; one value per call keeps the stream position simple.
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

double Rng::exponential(double rate) {
  if (!(rate > 0)) throw Error(ErrorCode::InvalidArgument, "exponential rate must be > 0");
  return -std::log1p(-uniform()) / rate;
}

std::uint64_t Rng::binomial(std::uint64_t n, double p) {
  if (!(p >= 0 && p <= 1)) throw Error(ErrorCode::InvalidArgument, "binomial p outside [0,1]");
  std::uint64_t k = 0;
  for (std::uint64_t i = 0; i < n; ++i) k += bernoulli(p) ? 1 : 0;
  return k;
}

std::uint64_t Rng::poisson(double mean) {
  if (!(mean >= 0) || !std::isfinite(mean)) {
    throw Error(ErrorCode::InvalidArgument, "poisson mean must be finite and >= 0");
  }
  // Knuth's product method in chunks so exp(-chunk) never underflows.
  std::uint64_t total = 0;
  double remaining = mean;
  while (remaining > 0) {
    const double chunk = std::min(remaining, 200.0);
    remaining -= chunk;
    const double limit = std::exp(-chunk);
    double prod = uniform();
    while (prod > limit) {
      ++total;
      prod *= uniform();
    }
  }
  return total;
}

int Rng::categorical(std::initializer_list<double> weights) {
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0)) throw Error(ErrorCode::InvalidArgument, "categorical weights must be >= 0");
    sum += w;
  }
  if (!(sum > 0)) throw Error(ErrorCode::InvalidArgument, "categorical weights sum to zero");
  const double u = uniform() * sum;
  double acc = 0.0;
  int index = 0;
  int last_positive = 0;
  for (double w : weights) {
    acc += w;
    if (w > 0) last_positive = index;
    if (u < acc) return index;
    ++index;
  }
  return last_positive;
}

}  // namespace nvsim

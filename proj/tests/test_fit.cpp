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
#include "nvsim/fit.hpp"
#include "nvsim/random.hpp"
#include "nvsim/types.hpp"

using namespace nvsim;

namespace {

struct Data {
  std::vector<double> x, y;
};

Data synth(FitModel m, const std::vector<double>& p, double x0, double x1, int n, double noise, std::uint64_t seed) {
  Data d;
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    const double x = x0 + (x1 - x0) * i / (n - 1);
    d.x.push_back(x);
    d.y.push_back(model_value(m, p, x) + noise * rng.normal());
  }
  return d;
}

}  // namespace

TEST_SUITE("fit") {

TEST_CASE("exact data recover the generating parameters") {
  struct Case {
    FitModel m;
    std::vector<double> p;
    double x1;
  };
  const Case cases[] = {
      {FitModel::ExponentialDecay, {0.1, 0.8, 0.04}, 100},
      {FitModel::ExponentialApproach, {0.9, 0.6, 1.8}, 4},
      {FitModel::CosineDecay, {0.5, 0.45, 0.002, 0.0197, 0.3}, 300},
      {FitModel::DoubleSigmoid, {0.7, -2, 1, 1, 6, 0.4}, 10},
  };
  for (const auto& c : cases) {
    const double x0 = c.m == FitModel::DoubleSigmoid ? -10 : 0;
    const Data d = synth(c.m, c.p, x0, c.x1, 41, 0.0, 1);
    const FitResult r = fit_curve(d.x, d.y, c.m);
    CAPTURE(to_string(c.m));
    for (std::size_t k = 0; k < c.p.size(); ++k) CHECK(r.params[k] == doctest::Approx(c.p[k]).epsilon(1e-5));
  }
}

TEST_CASE("intervals cover the truth at about the nominal rate") {
  const std::vector<double> p{0.2, 0.7, 0.05};
  int covered = 0;
  const int reps = 400;
  for (int i = 0; i < reps; ++i) {
    const Data d = synth(FitModel::ExponentialDecay, p, 0, 80, 15, 0.03, 100 + i);
    const FitResult r = fit_curve(d.x, d.y, FitModel::ExponentialDecay);
    if (r.ci_low[2] <= p[2] && p[2] <= r.ci_high[2]) ++covered;
  }
  // Binomial 4 sigma around 0.95 at 400 repetitions.
  CHECK(std::abs(covered / double(reps) - 0.95) < 4 * std::sqrt(0.95 * 0.05 / reps));
}

TEST_CASE("too few points are rejected") {
  const std::vector<double> x{0, 1, 2, 3, 4}, y{1, 0.8, 0.6, 0.5, 0.4};
  CHECK_THROWS_AS(fit_curve(x, y, FitModel::CosineDecay), Error);
}

TEST_CASE("bounds are respected") {
  const Data d = synth(FitModel::ExponentialDecay, {0.0, 1.0, 0.1}, 0, 30, 20, 0.0, 3);
  FitSpec spec = guess_spec(FitModel::ExponentialDecay, d.x, d.y);
  spec.upper = {10, 10, 0.05};
  spec.lower = {-10, -10, 0};
  spec.initial[2] = 0.04;
  const FitResult r = fit_curve(d.x, d.y, spec);
  CHECK(r.params[2] <= 0.05);
}

}

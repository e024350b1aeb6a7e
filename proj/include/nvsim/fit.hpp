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

#include <string>
#include <string_view>
#include <vector>

namespace nvsim {

enum class FitModel {
  CosineDecay,          ///< y0 + A exp(-k x) cos(2 pi f x + phi)      [y0, A, k, f, phi]
  ExponentialDecay,     ///< y0 + A exp(-k x)                          [y0, A, k]
  ExponentialApproach,  ///< plateau - amp exp(-k x)                   [plateau, amp, k]
  DoubleSigmoid,        ///< m1/(1+e^((x-x1)/w1)) + m2/(1+e^(-(x-x2)/w2))  [m1, x1, w1, m2, x2, w2]
};

std::string_view to_string(FitModel model);
std::vector<std::string> parameter_names(FitModel model);
int parameter_count(FitModel model);

double model_value(FitModel model, const std::vector<double>& params, double x);

/// Initial guesses and box bounds. Empty vectors mean "derive from the data"
/// (guesses) or the model's natural bounds.
struct FitSpec {
  FitModel model = FitModel::ExponentialDecay;
  std::vector<double> initial;
  std::vector<double> lower;
  std::vector<double> upper;
  int max_iterations = 500;
};

struct FitResult {
  FitModel model = FitModel::ExponentialDecay;
  std::vector<double> params;
  std::vector<double> errors;   ///< standard errors, s^2 (J^T J)^-1
  std::vector<double> ci_low;   ///< 95% Student-t interval
  std::vector<double> ci_high;
  double residual_sum = 0.0;    ///< sum of squared residuals
  int dof = 0;
  int iterations = 0;
  bool converged = false;
  std::string message;

  double value(double x) const { return model_value(model, params, x); }
};

/// Default spec for `model` with guesses derived from the data.
FitSpec guess_spec(FitModel model, const std::vector<double>& x, const std::vector<double>& y);

/// Bounded Levenberg-Marquardt. Throws Error(Fit) when there are fewer than
/// two points per parameter or the inputs are inconsistent; non-convergence is
/// reported in the result.
FitResult fit_curve(const std::vector<double>& x, const std::vector<double>& y, const FitSpec& spec);

/// Convenience: guess_spec followed by fit_curve.
FitResult fit_curve(const std::vector<double>& x, const std::vector<double>& y, FitModel model);

}  // namespace nvsim

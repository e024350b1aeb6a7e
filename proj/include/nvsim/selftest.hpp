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

#include "nvsim/experiments.hpp"

namespace nvsim {

/// Numerical invariants: per-segment trace, Hermiticity and positivity of the
/// executor state for every built-in template, unitary reversibility, the
/// relaxation semigroup law, nuclear-state preservation across charge
/// switches, template print/parse identity and run-to-run determinism.
ExperimentResult run_selftest(const Config& config);

}  // namespace nvsim

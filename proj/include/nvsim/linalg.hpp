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

#include "nvsim/types.hpp"

namespace nvsim {

/// Eigenvalues ascending; each eigenvector column has its largest-magnitude
/// component real and positive.
struct Eigensystem {
  Eigen::VectorXd values;
  Operator vectors;

  int dim() const { return static_cast<int>(values.size()); }
};

Eigensystem diagonalize(const Operator& hermitian);

/// max |H - H^dagger| entry.
double hermiticity_error(const Operator& m);
/// Largest absolute entry, used as the scale for relative tolerances.
double max_abs_entry(const Operator& m);
bool is_hermitian(const Operator& m, double relative_tolerance = 1e-12);

/// exp(-2 pi i H t) for Hermitian H.
Operator propagator(const Operator& hamiltonian, double t);
Operator propagator(const Eigensystem& eig, double t);

/// Squared norm of the part of `state` orthogonal to `reference` (both normalised).
/// Equals 1 - |<reference|state>|^2 without the cancellation.
double infidelity(const StateVector& reference, const StateVector& state);

/// -Tr(rho log2 rho).
double von_neumann_entropy(const Operator& rho);

}  // namespace nvsim

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

inline constexpr double kTraceTolerance = 1e-10;
inline constexpr double kHermiticityTolerance = 1e-10;
inline constexpr double kPositivityTolerance = -1e-9;

/// Dense density matrix. Constructors validate trace, Hermiticity and
/// positivity; `unchecked` skips that for intermediate results.
class DensityMatrix {
 public:
  DensityMatrix() = default;
  explicit DensityMatrix(Operator m);

  static DensityMatrix pure(const StateVector& psi);
  static DensityMatrix maximally_mixed(int dim);
  static DensityMatrix basis_state(int dim, int index);
  static DensityMatrix unchecked(Operator m);

  const Operator& matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }

  double trace_error() const;
  double hermiticity_error() const;
  double min_eigenvalue() const;
  /// Throws Error(NotHermitian / InvalidArgument) naming the violated invariant.
  void validate() const;

  double population(int index) const { return m_(index, index).real(); }
  double expectation(const Operator& observable) const;
  double purity() const;

 private:
  Operator m_;
};

}  // namespace nvsim

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

#include <span>
#include <vector>

#include "nvsim/types.hpp"

namespace nvsim {

/// Angular momentum matrices in the |m = +s, ..., -s> basis.
struct SpinOperators {
  Operator sx;
  Operator sy;
  Operator sz;
  Operator s_plus;
  Operator s_minus;

  int dim() const { return static_cast<int>(sz.rows()); }
};

/// Rejects s unless 2s is a non-negative integer.
SpinOperators spin_operators(double s);
SpinOperators spin_operators(SpinQuantum spin);

Operator identity(int dim);
Operator kron(const Operator& a, const Operator& b);

// Multi-subsystem helpers. `dims` lists subsystem dimensions, first factor most
// significant in the flattened index.

/// Embeds `local` acting on subsystems `targets` (in that order) into the full space.
Operator embed(const Operator& local, std::span<const int> dims, std::span<const int> targets);

/// Traces out every subsystem not listed in `keep`; kept factors stay in ascending order.
Operator partial_trace(const Operator& rho, std::span<const int> dims, std::span<const int> keep);

/// Reorders subsystems: new factor k is old factor perm[k].
Operator permute_subsystems(const Operator& rho, std::span<const int> dims,
                            std::span<const int> perm);

}  // namespace nvsim

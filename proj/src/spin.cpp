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

#include "nvsim/spin.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nvsim {

namespace {

int total_dim(std::span<const int> dims) {
  return std::accumulate(dims.begin(), dims.end(), 1, std::multiplies<>());
}

std::vector<int> strides_of(std::span<const int> dims) {
  std::vector<int> strides(dims.size(), 1);
  for (int k = static_cast<int>(dims.size()) - 2; k >= 0; --k) {
    strides[k] = strides[k + 1] * dims[k + 1];
  }
  return strides;
}

}  // namespace

SpinOperators spin_operators(SpinQuantum spin) {
  if (spin.twice < 0) throw Error(ErrorCode::InvalidArgument, "spin must be non-negative");
  const int dim = spin.multiplicity();
  const double s = spin.value();
  SpinOperators ops;
  ops.sz = Operator::Zero(dim, dim);
  ops.s_plus = Operator::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    const double m = s - i;
    ops.sz(i, i) = m;
    // <m+1| S+ |m> sits one row above.
    if (i > 0) ops.s_plus(i - 1, i) = std::sqrt(s * (s + 1) - m * (m + 1));
  }
  ops.s_minus = ops.s_plus.adjoint();
  ops.sx = 0.5 * (ops.s_plus + ops.s_minus);
  ops.sy = Complex(0, -0.5) * (ops.s_plus - ops.s_minus);
  return ops;
}

SpinOperators spin_operators(double s) {
  const double twice = 2.0 * s;
  if (!std::isfinite(s) || s < 0 || std::abs(twice - std::round(twice)) > 1e-12) {
    throw Error(ErrorCode::InvalidArgument,
                "spin quantum number must be a non-negative half-integer, got " +
                    std::to_string(s));
  }
  return spin_operators(SpinQuantum{static_cast<int>(std::lround(twice))});
}

Operator identity(int dim) { return Operator::Identity(dim, dim); }

Operator kron(const Operator& a, const Operator& b) {
  Operator out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Operator embed(const Operator& local, std::span<const int> dims, std::span<const int> targets) {
  const int n = total_dim(dims);
  int local_dim = 1;
  for (int t : targets) local_dim *= dims[t];
  if (local.rows() != local_dim || local.cols() != local_dim) {
    throw Error(ErrorCode::DimensionMismatch, "embedded operator has wrong dimension");
  }
  const auto strides = strides_of(dims);
  std::vector<int> target_strides(targets.size(), 1);
  for (int k = static_cast<int>(targets.size()) - 2; k >= 0; --k) {
    target_strides[k] = target_strides[k + 1] * dims[targets[k + 1]];
  }
  std::vector<bool> is_target(dims.size(), false);
  for (int t : targets) is_target[t] = true;

  auto local_index = [&](int flat) {
    int idx = 0;
    for (std::size_t k = 0; k < targets.size(); ++k) {
      idx += ((flat / strides[targets[k]]) % dims[targets[k]]) * target_strides[k];
    }
    return idx;
  };
  auto rest_index = [&](int flat) {
    int idx = 0;
    for (std::size_t k = 0; k < dims.size(); ++k) {
      if (!is_target[k]) idx += ((flat / strides[k]) % dims[k]) * strides[k];
    }
    return idx;
  };

  Operator out = Operator::Zero(n, n);
  for (int r = 0; r < n; ++r) {
    const int rr = rest_index(r);
    const int lr = local_index(r);
    for (int c = 0; c < n; ++c) {
      if (rest_index(c) != rr) continue;
      out(r, c) = local(lr, local_index(c));
    }
  }
  return out;
}

Operator partial_trace(const Operator& rho, std::span<const int> dims, std::span<const int> keep) {
  const int n = total_dim(dims);
  if (rho.rows() != n || rho.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch, "partial_trace: state dimension mismatch");
  }
  const auto strides = strides_of(dims);
  std::vector<bool> kept(dims.size(), false);
  int kept_dim = 1;
  for (int k : keep) {
    kept[k] = true;
    kept_dim *= dims[k];
  }
  std::vector<int> keep_sorted(keep.begin(), keep.end());
  std::sort(keep_sorted.begin(), keep_sorted.end());
  std::vector<int> kept_strides(keep_sorted.size(), 1);
  for (int k = static_cast<int>(keep_sorted.size()) - 2; k >= 0; --k) {
    kept_strides[k] = kept_strides[k + 1] * dims[keep_sorted[k + 1]];
  }
  auto kept_index = [&](int flat) {
    int idx = 0;
    for (std::size_t k = 0; k < keep_sorted.size(); ++k) {
      idx += ((flat / strides[keep_sorted[k]]) % dims[keep_sorted[k]]) * kept_strides[k];
    }
    return idx;
  };
  auto traced_index = [&](int flat) {
    int idx = 0;
    for (std::size_t k = 0; k < dims.size(); ++k) {
      if (!kept[k]) idx += ((flat / strides[k]) % dims[k]) * strides[k];
    }
    return idx;
  };

  Operator out = Operator::Zero(kept_dim, kept_dim);
  for (int r = 0; r < n; ++r) {
    const int tr = traced_index(r);
    const int kr = kept_index(r);
    for (int c = 0; c < n; ++c) {
      if (traced_index(c) != tr) continue;
      out(kr, kept_index(c)) += rho(r, c);
    }
  }
  return out;
}

Operator permute_subsystems(const Operator& rho, std::span<const int> dims,
                            std::span<const int> perm) {
  const int n = total_dim(dims);
  std::vector<int> new_dims(perm.size());
  for (std::size_t k = 0; k < perm.size(); ++k) new_dims[k] = dims[perm[k]];
  const auto old_strides = strides_of(dims);
  const auto new_strides = strides_of(new_dims);
  std::vector<int> map(n);
  for (int flat = 0; flat < n; ++flat) {
    int target = 0;
    for (std::size_t k = 0; k < perm.size(); ++k) {
      const int digit = (flat / old_strides[perm[k]]) % dims[perm[k]];
      target += digit * new_strides[k];
    }
    map[flat] = target;
  }
  Operator out(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) out(map[r], map[c]) = rho(r, c);
  }
  return out;
}

}  // namespace nvsim

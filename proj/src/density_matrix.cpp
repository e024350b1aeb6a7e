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

#include "nvsim/density_matrix.hpp"

#include <cmath>
#include <sstream>

#include "nvsim/linalg.hpp"

namespace nvsim {

DensityMatrix::DensityMatrix(Operator m) : m_(std::move(m)) { validate(); }

DensityMatrix DensityMatrix::unchecked(Operator m) {
  DensityMatrix rho;
  rho.m_ = std::move(m);
  return rho;
}

DensityMatrix DensityMatrix::pure(const StateVector& psi) {
  const double norm = psi.norm();
  if (!(norm > 0)) throw Error(ErrorCode::InvalidArgument, "pure state has zero norm");
  const StateVector v = psi / norm;
  return unchecked(v * v.adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
  if (dim <= 0) throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
  return unchecked(Operator::Identity(dim, dim) / static_cast<double>(dim));
}

DensityMatrix DensityMatrix::basis_state(int dim, int index) {
  if (index < 0 || index >= dim) throw Error(ErrorCode::InvalidArgument, "basis index out of range");
  Operator m = Operator::Zero(dim, dim);
  m(index, index) = 1.0;
  return unchecked(std::move(m));
}

double DensityMatrix::trace_error() const { return std::abs(m_.trace() - Complex(1.0, 0.0)); }

double DensityMatrix::hermiticity_error() const { return nvsim::hermiticity_error(m_); }

double DensityMatrix::min_eigenvalue() const {
  if (m_.size() == 0) return 0.0;
  const Operator h = 0.5 * (m_ + m_.adjoint());
  Eigen::SelfAdjointEigenSolver<Operator> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

void DensityMatrix::validate() const {
  if (m_.rows() != m_.cols() || m_.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "density matrix must be square and non-empty");
  }
  if (!m_.allFinite()) throw Error(ErrorCode::InvalidArgument, "density matrix has non-finite entries");
  if (hermiticity_error() > kHermiticityTolerance) {
    throw Error(ErrorCode::NotHermitian, "density matrix is not Hermitian");
  }
  if (trace_error() > kTraceTolerance) {
    std::ostringstream os;
    os << "density matrix trace deviates from 1 by " << trace_error();
    throw Error(ErrorCode::InvalidArgument, os.str());
  }
  if (min_eigenvalue() < kPositivityTolerance) {
    std::ostringstream os;
    os << "density matrix has negative eigenvalue " << min_eigenvalue();
    throw Error(ErrorCode::InvalidArgument, os.str());
  }
}

double DensityMatrix::expectation(const Operator& observable) const {
  if (observable.rows() != m_.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "observable dimension mismatch");
  }
  return (m_ * observable).trace().real();
}

double DensityMatrix::purity() const { return (m_ * m_).trace().real(); }

}  // namespace nvsim

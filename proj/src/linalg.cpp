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

#include "nvsim/linalg.hpp"

#include <cmath>

namespace nvsim {

Eigensystem diagonalize(const Operator& hermitian) {
  if (hermitian.rows() != hermitian.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "diagonalize: matrix is not square");
  }
  Eigen::SelfAdjointEigenSolver<Operator> solver(hermitian);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::Singular, "diagonalize: eigensolver failed");
  }
  Eigensystem eig{solver.eigenvalues(), solver.eigenvectors()};
  for (Eigen::Index col = 0; col < eig.vectors.cols(); ++col) {
    Eigen::Index best = 0;
    eig.vectors.col(col).cwiseAbs().maxCoeff(&best);
    const Complex pivot = eig.vectors(best, col);
    eig.vectors.col(col) *= std::conj(pivot) / std::abs(pivot);
  }
  return eig;
}

double hermiticity_error(const Operator& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

double max_abs_entry(const Operator& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

bool is_hermitian(const Operator& m, double relative_tolerance) {
  if (m.rows() != m.cols()) return false;
  return hermiticity_error(m) <= relative_tolerance * std::max(max_abs_entry(m), 1e-300);
}

Operator propagator(const Eigensystem& eig, double t) {
  Eigen::VectorXcd phases(eig.dim());
  for (int k = 0; k < eig.dim(); ++k) {
    phases(k) = std::polar(1.0, -kTwoPi * eig.values(k) * t);
  }
  return eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
}

Operator propagator(const Operator& hamiltonian, double t) {
  return propagator(diagonalize(hamiltonian), t);
}

double infidelity(const StateVector& reference, const StateVector& state) {
  const Complex overlap = reference.dot(state);
  const StateVector residual = state - overlap * reference;
  return residual.squaredNorm();
}

double von_neumann_entropy(const Operator& rho) {
  Eigen::SelfAdjointEigenSolver<Operator> solver(rho, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k) {
    const double p = solver.eigenvalues()(k);
    if (p > 1e-15) s -= p * std::log2(p);
  }
  return s;
}

}  // namespace nvsim

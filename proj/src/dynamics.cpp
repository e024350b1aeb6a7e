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

#include "nvsim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "nvsim/spin.hpp"

namespace nvsim {

namespace {

bool valid_time(double v) { return v > 0 && !std::isnan(v); }

Operator hermitize(const Operator& m) { return 0.5 * (m + m.adjoint()); }

void require_duration(double t, const char* what) {
  if (!(t >= 0) || !std::isfinite(t)) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + ": duration must be >= 0");
  }
}

// -i 2pi [H, rho]
Operator von_neumann_rhs(const Operator& h, const Operator& rho) {
  return Complex(0, -kTwoPi) * (h * rho - rho * h);
}

}  // namespace

void RelaxationParams::validate(int nuclear_dim) const {
  for (double v : {t1_n, t2_n, t1_e, rabi_decay}) {
    if (!valid_time(v)) throw Error(ErrorCode::InvalidArgument, "relaxation times must be > 0");
  }
  if (std::isfinite(t1_n) && nuclear_dim > 1) {
    const double bound = t1_n * nuclear_dim / (nuclear_dim - 1.0);
    if (t2_n > bound * (1 + 1e-12)) {
      std::ostringstream os;
      os << "T2_n = " << t2_n << " us exceeds " << nuclear_dim << "/(" << nuclear_dim - 1
         << ") T1_n = " << bound << " us; the channel would not be completely positive";
      throw Error(ErrorCode::InvalidArgument, os.str());
    }
  }
}

const RelaxationParams& RelaxationSet::get(ChargeState charge) const {
  switch (charge) {
    case ChargeState::Minus: return minus;
    case ChargeState::Zero: return zero;
    case ChargeState::Plus: return plus;
  }
  return plus;
}

RelaxationParams& RelaxationSet::get(ChargeState charge) {
  return const_cast<RelaxationParams&>(std::as_const(*this).get(charge));
}

DensityMatrix evolve_unitary(const DensityMatrix& rho, const Eigensystem& eig, double t) {
  if (eig.dim() != rho.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "evolve_unitary: Hamiltonian and state dimensions differ");
  }
  if (!std::isfinite(t)) throw Error(ErrorCode::InvalidArgument, "evolve_unitary: non-finite time");
  if (t == 0.0) return rho;
  const Operator u = propagator(eig, t);
  return DensityMatrix::unchecked(hermitize(u * rho.matrix() * u.adjoint()));
}

DensityMatrix evolve_unitary(const DensityMatrix& rho, const Operator& hamiltonian, double t) {
  if (!is_hermitian(hamiltonian)) {
    throw Error(ErrorCode::NotHermitian, "evolve_unitary: Hamiltonian is not Hermitian");
  }
  return evolve_unitary(rho, diagonalize(hamiltonian), t);
}

std::optional<ResonantPair> find_resonant_pair(const Eigensystem& eig, const Operator& drive_op,
                                               double frequency) {
  const Operator v = eig.vectors.adjoint() * drive_op * eig.vectors;
  const double scale = max_abs_entry(v);
  if (scale == 0.0) return std::nullopt;
  std::optional<ResonantPair> best;
  for (int a = 0; a < eig.dim(); ++a) {
    for (int b = 0; b < eig.dim(); ++b) {
      const double gap = eig.values(a) - eig.values(b);
      if (gap <= 0 || std::abs(v(a, b)) < 1e-6 * scale) continue;
      const double detuning = gap - frequency;
      if (!best || std::abs(detuning) < std::abs(best->detuning)) {
        best = ResonantPair{a, b, gap, detuning, v(a, b)};
      }
    }
  }
  return best;
}

DrivenResult evolve_driven(const DensityMatrix& rho, const Eigensystem& h0, const Operator& drive_op,
                           const DriveField& drive, double t, const DrivenOptions& options) {
  require_duration(t, "evolve_driven");
  if (!(drive.amplitude >= 0) || !std::isfinite(drive.amplitude)) {
    throw Error(ErrorCode::InvalidArgument, "drive amplitude must be >= 0");
  }
  if (drive_op.rows() != rho.dim() || h0.dim() != rho.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "evolve_driven: dimension mismatch");
  }
  DrivenResult result;
  if (drive.amplitude == 0.0) {
    result.rho = evolve_unitary(rho, h0, t);
    return result;
  }

  const auto pair = find_resonant_pair(h0, drive_op, drive.frequency);
  if (!pair || std::abs(pair->detuning) > options.detuning_window) {
    std::ostringstream os;
    os << "no transition within " << options.detuning_window << " MHz of drive frequency "
       << drive.frequency << " MHz; evolved freely";
    result.warning = os.str();
    result.pair = pair;
    result.rho = evolve_unitary(rho, h0, t);
    return result;
  }
  result.pair = pair;
  const int a = pair->upper;
  const int b = pair->lower;
  const Complex coupling = 0.5 * drive.amplitude * pair->matrix_element;
  result.rabi_frequency = 2.0 * std::abs(coupling);

  // Frame energies: every level at its own energy except the addressed pair,
  // which is placed symmetrically around its mean and split by the drive frequency.
  Eigen::VectorXd frame = h0.values;
  const double mean = 0.5 * (h0.values(a) + h0.values(b));
  frame(a) = mean + 0.5 * drive.frequency;
  frame(b) = mean - 0.5 * drive.frequency;

  const double phase = drive.phase + kTwoPi * drive.frequency * options.t_start;
  Eigen::Matrix2cd h_pair;
  h_pair << 0.5 * pair->detuning, coupling * std::polar(1.0, -phase),
      std::conj(coupling) * std::polar(1.0, phase), -0.5 * pair->detuning;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> pair_eig(h_pair);
  const Eigen::Vector2d lam = pair_eig.eigenvalues();
  const Eigen::Matrix2cd w = pair_eig.eigenvectors();

  const int n = h0.dim();
  Operator basis = Operator::Identity(n, n);  // rotating-frame dressed basis
  basis(a, a) = w(0, 0);
  basis(a, b) = w(0, 1);
  basis(b, a) = w(1, 0);
  basis(b, b) = w(1, 1);

  // State in the dressed basis of the rotating frame.
  Operator r = basis.adjoint() * (h0.vectors.adjoint() * rho.matrix() * h0.vectors) * basis;
  Eigen::VectorXcd phases(n);
  for (int k = 0; k < n; ++k) phases(k) = std::polar(1.0, -kTwoPi * (h0.values(k) - frame(k)) * t);
  phases(a) = std::polar(1.0, -kTwoPi * lam(0) * t);
  phases(b) = std::polar(1.0, -kTwoPi * lam(1) * t);
  r = phases.asDiagonal() * r * phases.conjugate().asDiagonal();

  if (std::isfinite(options.rabi_decay)) {
    if (!valid_time(options.rabi_decay)) throw Error(ErrorCode::InvalidArgument, "rabi_decay must be > 0");
    // Gaussian random phase between the two dressed states.
    const double c = std::exp(-t / options.rabi_decay);
    const double c_cross = std::pow(c, 0.25);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const bool in_i = i == a || i == b;
        const bool in_j = j == a || j == b;
        if (in_i && in_j) r(i, j) *= c;
        else if (in_i || in_j) r(i, j) *= c_cross;
      }
    }
  }

  // Back to the lab frame: rotating-frame state, then the frame rotation.
  r = basis * r * basis.adjoint();
  Eigen::VectorXcd frame_phase(n);
  for (int k = 0; k < n; ++k) frame_phase(k) = std::polar(1.0, -kTwoPi * frame(k) * t);
  r = frame_phase.asDiagonal() * r * frame_phase.conjugate().asDiagonal();
  result.rho = DensityMatrix::unchecked(hermitize(h0.vectors * r * h0.vectors.adjoint()));
  return result;
}

DrivenResult evolve_driven(const DensityMatrix& rho, const Operator& h0, const Operator& drive_op,
                           const DriveField& drive, double t, const DrivenOptions& options) {
  if (!is_hermitian(h0)) throw Error(ErrorCode::NotHermitian, "evolve_driven: H0 is not Hermitian");
  return evolve_driven(rho, diagonalize(h0), drive_op, drive, t, options);
}

DensityMatrix evolve_driven_lab_frame(const DensityMatrix& rho, const Operator& h0,
                                      const Operator& drive_op, const DriveField& drive, double t,
                                      double t_start) {
  require_duration(t, "evolve_driven_lab_frame");
  if (!is_hermitian(h0)) throw Error(ErrorCode::NotHermitian, "lab frame: H0 is not Hermitian");
  const Eigensystem eig = diagonalize(h0);
  const double spread = eig.values.maxCoeff() - eig.values.minCoeff();
  const double f_max = std::max({spread, std::abs(drive.frequency), 1e-12});
  const double max_step = 1.0 / (50.0 * f_max);
  const long steps = std::max(1L, static_cast<long>(std::ceil(t / max_step)));
  const double h = t / static_cast<double>(steps);

  const Operator coupling = drive.amplitude * drive_op;
  auto hamiltonian = [&](double time) -> Operator {
    return h0 + std::cos(kTwoPi * drive.frequency * time + drive.phase) * coupling;
  };
  Operator r = rho.matrix();
  double time = t_start;
  for (long s = 0; s < steps; ++s) {
    const Operator h_start = hamiltonian(time);
    const Operator h_mid = hamiltonian(time + 0.5 * h);
    const Operator h_end = hamiltonian(time + h);
    const Operator k1 = von_neumann_rhs(h_start, r);
    const Operator k2 = von_neumann_rhs(h_mid, r + 0.5 * h * k1);
    const Operator k3 = von_neumann_rhs(h_mid, r + 0.5 * h * k2);
    const Operator k4 = von_neumann_rhs(h_end, r + h * k3);
    r += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    time += h;
  }
  return DensityMatrix::unchecked(hermitize(r));
}

DensityMatrix apply_relaxation(const DensityMatrix& rho, double t, const RelaxationParams& r,
                               ChargeState charge, Isotope isotope) {
  require_duration(t, "apply_relaxation");
  const SpaceLayout layout = layout_for(charge, isotope);
  if (rho.dim() != layout.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "apply_relaxation: state does not match charge/isotope");
  }
  r.validate(layout.nuclear_dim);
  if (t == 0.0) return rho;

  Operator m = rho.matrix();
  const int de = layout.electron_dim;
  const int dn = layout.nuclear_dim;

  // Depolarizing channel on one factor: off-diagonals scale by `coherence`,
  // diagonals mix towards the uniform state with weight 1 - `keep`.
  auto depolarize = [&](bool nuclear, double keep, double coherence) {
    Operator out = Operator::Zero(m.rows(), m.cols());
    const int d = nuclear ? dn : de;
    for (int e1 = 0; e1 < de; ++e1) {
      for (int e2 = 0; e2 < de; ++e2) {
        for (int n1 = 0; n1 < dn; ++n1) {
          for (int n2 = 0; n2 < dn; ++n2) {
            const int row = layout.index(e1, n1);
            const int col = layout.index(e2, n2);
            const bool diagonal = nuclear ? n1 == n2 : e1 == e2;
            if (!diagonal) {
              out(row, col) = coherence * m(row, col);
              continue;
            }
            Complex trace{0, 0};
            for (int k = 0; k < d; ++k) {
              trace += nuclear ? m(layout.index(e1, k), layout.index(e2, k))
                               : m(layout.index(k, n1), layout.index(k, n2));
            }
            out(row, col) = keep * m(row, col) + (1.0 - keep) / d * trace;
          }
        }
      }
    }
    m = out;
  };

  if (std::isfinite(r.t1_n) || std::isfinite(r.t2_n)) {
    depolarize(true, std::exp(-t / r.t1_n), std::exp(-t / r.t2_n));
  }
  if (de > 1 && std::isfinite(r.t1_e)) {
    const double lambda = std::exp(-t / r.t1_e);
    depolarize(false, lambda, lambda);
  }
  return DensityMatrix::unchecked(hermitize(m));
}

AddressedLine addressed_line(const SpinSetup& setup, const PhysicalParams& p) {
  const auto lines = nmr_transition_frequencies(setup.charge, setup.isotope, setup.sector, p);
  for (const auto& line : lines) {
    if (line.upper != setup.upper) continue;
    const Eigensystem eig = diagonalize(build_hamiltonian(setup.charge, setup.isotope, p));
    const Operator v = eig.vectors.adjoint() * drive_operator(setup.charge, setup.isotope, p) * eig.vectors;
    return AddressedLine{std::abs(line.frequency), std::abs(v(line.upper_state, line.lower_state)),
                         line.upper_state, line.lower_state};
  }
  throw Error(ErrorCode::InvalidArgument,
              "no nuclear transition starting at m_I = " + format_projection(setup.upper));
}

DensityMatrix prepared_state(const SpinSetup& setup, const PhysicalParams& p) {
  const AddressedLine line = addressed_line(setup, p);
  const Eigensystem eig = diagonalize(build_hamiltonian(setup.charge, setup.isotope, p));
  return DensityMatrix::pure(eig.vectors.col(line.initial_state));
}

namespace {

double population_of(const DensityMatrix& rho, const StateVector& v) {
  return (v.adjoint() * rho.matrix() * v)(0, 0).real();
}

}  // namespace

Trace simulate_rabi(const SpinSetup& setup, const PhysicalParams& p, const RelaxationParams& r,
                    double b1, const std::vector<double>& durations) {
  const AddressedLine line = addressed_line(setup, p);
  const Eigensystem eig = diagonalize(build_hamiltonian(setup.charge, setup.isotope, p));
  const Operator v = drive_operator(setup.charge, setup.isotope, p);
  const DensityMatrix rho0 = DensityMatrix::pure(eig.vectors.col(line.initial_state));
  const StateVector target = eig.vectors.col(line.target_state);
  DrivenOptions options;
  options.rabi_decay = r.rabi_decay;
  Trace trace;
  for (double t : durations) {
    const auto out = evolve_driven(rho0, eig, v, DriveField{b1, line.frequency, 0.0}, t, options);
    if (!out.warning.empty()) throw Error(ErrorCode::InvalidArgument, out.warning);
    trace.x.push_back(t);
    trace.y.push_back(population_of(out.rho, target));
  }
  return trace;
}

Trace simulate_echo(const SpinSetup& setup, const PhysicalParams& p, const RelaxationParams& r,
                    double b1, const std::vector<double>& taus, double detuning) {
  if (!(b1 > 0)) throw Error(ErrorCode::InvalidArgument, "echo needs a positive drive amplitude");
  const AddressedLine line = addressed_line(setup, p);
  const Eigensystem eig0 = diagonalize(build_hamiltonian(setup.charge, setup.isotope, p));
  const SpaceLayout layout = layout_for(setup.charge, setup.isotope);
  const Operator iz =
      kron(identity(layout.electron_dim), spin_operators(nuclear_spin(setup.isotope)).sz);
  const Eigensystem eig =
      diagonalize(build_hamiltonian(setup.charge, setup.isotope, p) + detuning * iz);
  const Operator v = drive_operator(setup.charge, setup.isotope, p);

  // Track the prepared and target states through the (small) detuning.
  auto closest = [&](const StateVector& ref) {
    Eigen::Index best = 0;
    (eig.vectors.adjoint() * ref).cwiseAbs().maxCoeff(&best);
    return eig.vectors.col(best);
  };
  const StateVector initial = closest(eig0.vectors.col(line.initial_state));
  const StateVector target = closest(eig0.vectors.col(line.target_state));
  const DensityMatrix rho0 = DensityMatrix::pure(initial);

  const double rabi = b1 * line.rabi_per_tesla;
  const double t_pi = 0.5 / rabi;
  DrivenOptions options;
  options.rabi_decay = r.rabi_decay;
  options.detuning_window = std::max(options.detuning_window, 2.0 * std::abs(detuning));

  auto pulse = [&](const DensityMatrix& rho, double duration, double phase, double start) {
    options.t_start = start;
    auto out = evolve_driven(rho, eig, v, DriveField{b1, line.frequency, phase}, duration, options);
    if (!out.warning.empty()) throw Error(ErrorCode::InvalidArgument, out.warning);
    return out.rho;
  };
  auto wait = [&](const DensityMatrix& rho, double duration) {
    return apply_relaxation(evolve_unitary(rho, eig, duration), duration, r, setup.charge,
                            setup.isotope);
  };

  Trace trace;
  for (double tau : taus) {
    require_duration(tau, "simulate_echo");
    double clock = 0.0;
    DensityMatrix rho = pulse(rho0, 0.5 * t_pi, 0.0, clock);
    clock += 0.5 * t_pi;
    rho = wait(rho, tau);
    clock += tau;
    rho = pulse(rho, t_pi, 0.0, clock);
    clock += t_pi;
    rho = wait(rho, tau);
    clock += tau;
    const double p0 = population_of(pulse(rho, 0.5 * t_pi, 0.0, clock), target);
    const double p1 = population_of(pulse(rho, 0.5 * t_pi, kPi, clock), target);
    trace.x.push_back(2.0 * tau);
    trace.y.push_back(std::abs(p0 - p1));
  }
  return trace;
}

Trace simulate_t1(const SpinSetup& setup, const PhysicalParams& p, const RelaxationParams& r,
                  const std::vector<double>& waits) {
  const AddressedLine line = addressed_line(setup, p);
  const Eigensystem eig = diagonalize(build_hamiltonian(setup.charge, setup.isotope, p));
  const StateVector initial = eig.vectors.col(line.initial_state);
  const DensityMatrix rho0 = DensityMatrix::pure(initial);
  Trace trace;
  for (double t : waits) {
    require_duration(t, "simulate_t1");
    const DensityMatrix rho =
        apply_relaxation(evolve_unitary(rho0, eig, t), t, r, setup.charge, setup.isotope);
    trace.x.push_back(t);
    trace.y.push_back(population_of(rho, initial));
  }
  return trace;
}

}  // namespace nvsim

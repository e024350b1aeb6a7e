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
#include <vector>

#include <Eigen/Dense>

#include "nvsim/charge_model.hpp"
#include "nvsim/dynamics.hpp"
#include "nvsim/random.hpp"

namespace nvsim {

/// Secular dipolar coupling k_dd gamma_e^2 (1 - 3 cos^2 theta) / r^3 in MHz,
/// positions in nm, theta measured from the NV axis (z). Throws for r = 0.
double dipole_coupling(const Eigen::Vector3d& r_i, const Eigen::Vector3d& r_j, double gamma_e,
                       double k_dd);

struct Node {
  std::string id;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();  ///< nm
  Isotope isotope = Isotope::N15;
};

struct RegisterOptions {
  RelaxationSet relaxation;
  double gamma_e = 28024.0;
  double k_dd = 6.62607015e-8;
  double swap_error = 0.0;
  ElectronAttachment dark_attachment = ElectronAttachment::Ground;
};

enum class ProtocolPhase { Initialization, Operation, Readout };
std::string_view to_string(ProtocolPhase phase);
ProtocolPhase parse_protocol_phase(std::string_view text);

struct MeasurementRecord {
  std::string node;
  ProtocolPhase phase = ProtocolPhase::Readout;
  int outcome = 0;           ///< 0: electron mS = 0 (nucleus up), 1: mS = -1
  double probability = 0.0;  ///< Born probability of the recorded outcome
};

/// Two NV nodes. Each node carries an S = 1 electron slot (unused while the
/// node is NV+) and its nitrogen spin; the joint space is ordered
/// (e_A, n_A, e_B, n_B). The electron qubit is {mS = 0, mS = -1} and the
/// nuclear qubit {m_I = +I, +I - 1}.
class Register {
 public:
  /// Starts with every node in NV+, nuclei in m_I = +I.
  Register(std::vector<Node> nodes, RegisterOptions options);

  int size() const { return static_cast<int>(nodes_.size()); }
  const Node& node(int k) const { return nodes_.at(k); }
  ChargeState charge(int k) const { return charges_.at(k); }
  const Operator& state() const { return rho_; }
  void set_state(const Operator& rho);
  /// Symmetric coupling matrix with zero diagonal, MHz.
  Eigen::Matrix2d couplings() const { return couplings_; }
  double coupling() const { return couplings_(0, 1); }
  std::vector<int> dims() const;

  void switch_charge(int k, ChargeState to);
  /// Laser: every node to NV- with its electron in mS = 0.
  void laser_init_all();
  /// Exchanges the electron and nuclear qubits of node k (needs NV-).
  void swap_electron_nuclear(int k);
  /// Hadamard on the electron qubit of node k.
  void electron_hadamard(int k);
  /// exp(-2 pi i J t Sz_A Sz_B); both nodes must be NV-.
  void entangle(double t);
  /// Flips the electron qubit when the nucleus is in its lower qubit level.
  void correlate(int k);
  int measure_electron(int k, Rng& rng, double* probability = nullptr);
  /// Free storage: relaxation of every node per its charge state.
  void wait(double t);

  /// Reduced state of both nuclei, ordered (n_A, n_B).
  Operator nuclear_state() const;
  Operator nuclear_state(int k) const;
  /// Largest overlap with the four Bell states of the nuclear qubits.
  double bell_fidelity() const;
  /// |<up|rho_n|down>| of node k's nucleus.
  double nuclear_coherence(int k) const;

  /// Runs one phase. Initialization: laser init, swap e->n, all to NV+.
  /// Operation: both to NV-, swap n->e, Hadamards, entangle for 1/(2J),
  /// Hadamard on B, swap back, all to NV+. Readout: node `target` to NV-,
  /// correlate, read the electron, back to NV+.
  std::vector<MeasurementRecord> run_phase(ProtocolPhase phase, Rng& rng, int target = 0);

 private:
  int offset_e(int k) const { return 2 * k; }
  int offset_n(int k) const { return 2 * k + 1; }
  void apply_unitary(const Operator& u);
  void apply_gate(const Operator& u, double error);
  void require_charge(int k, ChargeState c, const char* what) const;

  std::vector<Node> nodes_;
  RegisterOptions options_;
  std::vector<ChargeState> charges_;
  Eigen::Matrix2d couplings_ = Eigen::Matrix2d::Zero();
  Operator rho_;
};

/// Retained nuclear coherence after storing a superposition for `tau` in NV+
/// divided by the same storage in NV-, from a simulated register.
double storage_coherence_ratio(const RegisterOptions& options, Isotope isotope, double tau);

}  // namespace nvsim

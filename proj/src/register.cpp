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

#include "nvsim/register.hpp"

#include <algorithm>
#include <cmath>

#include "nvsim/spin.hpp"

namespace nvsim {

namespace {

constexpr int kElectronDim = 3;
constexpr int kMsZero = 1;      // index of mS = 0 in (+1, 0, -1)
constexpr int kMsMinusOne = 2;

struct Digits {
  std::vector<int> dims;
  std::vector<int> strides;

  explicit Digits(std::vector<int> d) : dims(std::move(d)), strides(dims.size(), 1) {
    for (int k = static_cast<int>(dims.size()) - 2; k >= 0; --k) strides[k] = strides[k + 1] * dims[k + 1];
  }
  int digit(int flat, int sub) const { return (flat / strides[sub]) % dims[sub]; }
  int with(int flat, int sub, int value) const {
    return flat + (value - digit(flat, sub)) * strides[sub];
  }
};

// Channel on subsystem `sub`: coherences between different levels scale by
// `coherence`, the block diagonal relaxes to (Tr_sub rho) x I/d with weight
// 1 - lambda.
Operator local_channel(const Operator& rho, const Digits& g, int sub, double lambda, double coherence) {
  const int n = static_cast<int>(rho.rows());
  const int d = g.dims[sub];
  Operator out(n, n);
  for (int i = 0; i < n; ++i) {
    const int di = g.digit(i, sub);
    for (int j = 0; j < n; ++j) {
      const int dj = g.digit(j, sub);
      if (di != dj) {
        out(i, j) = coherence * rho(i, j);
        continue;
      }
      Complex traced = 0.0;
      for (int m = 0; m < d; ++m) traced += rho(g.with(i, sub, m), g.with(j, sub, m));
      out(i, j) = lambda * rho(i, j) + (1.0 - lambda) / d * traced;
    }
  }
  return out;
}

// Replaces subsystem `sub` by `local` (a d x d density matrix).
Operator replace_subsystem(const Operator& rho, const Digits& g, int sub, const Operator& local) {
  const int n = static_cast<int>(rho.rows());
  const int d = g.dims[sub];
  Operator out(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Complex traced = 0.0;
      for (int m = 0; m < d; ++m) traced += rho(g.with(i, sub, m), g.with(j, sub, m));
      out(i, j) = local(g.digit(i, sub), g.digit(j, sub)) * traced;
    }
  }
  return out;
}

Operator electron_ground() {
  Operator e = Operator::Zero(kElectronDim, kElectronDim);
  e(kMsZero, kMsZero) = 1.0;
  return e;
}

}  // namespace

double dipole_coupling(const Eigen::Vector3d& r_i, const Eigen::Vector3d& r_j, double gamma_e,
                       double k_dd) {
  const Eigen::Vector3d r = r_j - r_i;
  const double r2 = r.squaredNorm();
  if (!(r2 > 0)) throw Error(ErrorCode::InvalidArgument, "dipole_coupling: coincident positions");
  // (1 - 3 cos^2) / r^3 written as (r^2 - 3 z^2) / r^5 so the magic angle is exact.
  const double angular = r2 - 3.0 * r.z() * r.z();
  return k_dd * gamma_e * gamma_e * angular / (r2 * r2 * std::sqrt(r2));
}

std::string_view to_string(ProtocolPhase phase) {
  switch (phase) {
    case ProtocolPhase::Initialization: return "initialization";
    case ProtocolPhase::Operation: return "operation";
    case ProtocolPhase::Readout: return "readout";
  }
  return "?";
}

ProtocolPhase parse_protocol_phase(std::string_view text) {
  if (text == "initialization") return ProtocolPhase::Initialization;
  if (text == "operation") return ProtocolPhase::Operation;
  if (text == "readout") return ProtocolPhase::Readout;
  throw Error(ErrorCode::InvalidArgument, "unknown protocol phase '" + std::string(text) + "'");
}

Register::Register(std::vector<Node> nodes, RegisterOptions options)
    : nodes_(std::move(nodes)), options_(std::move(options)) {
  if (nodes_.size() > 2) {
    throw Error(ErrorCode::Capability, "registers with more than two nodes are not supported (got " +
                                           std::to_string(nodes_.size()) + ")");
  }
  if (nodes_.size() < 2) throw Error(ErrorCode::InvalidArgument, "a register needs two nodes");
  if (!(options_.swap_error >= 0 && options_.swap_error <= 1)) {
    throw Error(ErrorCode::InvalidArgument, "swap_error must lie in [0, 1]");
  }
  for (const Node& n : nodes_) {
    options_.relaxation.minus.validate(nuclear_spin(n.isotope).multiplicity());
    options_.relaxation.plus.validate(nuclear_spin(n.isotope).multiplicity());
  }
  const double j = dipole_coupling(nodes_[0].position, nodes_[1].position, options_.gamma_e, options_.k_dd);
  couplings_(0, 1) = couplings_(1, 0) = j;
  charges_.assign(nodes_.size(), ChargeState::Plus);

  Operator rho = Operator::Ones(1, 1);
  for (const Node& n : nodes_) {
    const int dn = nuclear_spin(n.isotope).multiplicity();
    Operator up = Operator::Zero(dn, dn);
    up(0, 0) = 1.0;
    rho = kron(kron(rho, electron_ground()), up);
  }
  rho_ = rho;
}

std::vector<int> Register::dims() const {
  std::vector<int> d;
  for (const Node& n : nodes_) {
    d.push_back(kElectronDim);
    d.push_back(nuclear_spin(n.isotope).multiplicity());
  }
  return d;
}

void Register::set_state(const Operator& rho) {
  if (rho.rows() != rho_.rows() || rho.cols() != rho_.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "register state has the wrong dimension");
  }
  rho_ = rho;
}

void Register::require_charge(int k, ChargeState c, const char* what) const {
  if (charges_.at(k) != c) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " requires node " + nodes_[k].id +
                                                " in " + std::string(to_string(c)) + ", found " +
                                                std::string(to_string(charges_[k])));
  }
}

void Register::switch_charge(int k, ChargeState to) {
  if (to == ChargeState::Zero) {
    throw Error(ErrorCode::Capability, "register nodes switch between NV- and NV+ only");
  }
  if (charges_.at(k) == to) return;
  const Digits g(dims());
  Operator electron = electron_ground();
  if (to == ChargeState::Minus && options_.dark_attachment == ElectronAttachment::MaximallyMixed) {
    electron = identity(kElectronDim) / static_cast<double>(kElectronDim);
  }
  // NV+ has no electron; its slot is parked in mS = 0 and never touched.
  rho_ = replace_subsystem(rho_, g, offset_e(k), electron);
  charges_[k] = to;
}

void Register::laser_init_all() {
  const Digits g(dims());
  for (int k = 0; k < size(); ++k) {
    rho_ = replace_subsystem(rho_, g, offset_e(k), electron_ground());
    charges_[k] = ChargeState::Minus;
  }
}

void Register::apply_unitary(const Operator& u) { rho_ = u * rho_ * u.adjoint(); }

void Register::apply_gate(const Operator& u, double error) {
  const Operator ideal = u * rho_ * u.adjoint();
  rho_ = (1.0 - error) * ideal + error * rho_;
}

void Register::swap_electron_nuclear(int k) {
  require_charge(k, ChargeState::Minus, "swap");
  const auto d = dims();
  const int dn = d[offset_n(k)];
  Operator local = identity(kElectronDim * dn);
  const int a = kMsZero * dn + 1;       // |0, down>
  const int b = kMsMinusOne * dn + 0;   // |-1, up>
  local(a, a) = local(b, b) = 0.0;
  local(a, b) = local(b, a) = 1.0;
  const int targets[] = {offset_e(k), offset_n(k)};
  apply_gate(embed(local, d, targets), options_.swap_error);
}

void Register::electron_hadamard(int k) {
  require_charge(k, ChargeState::Minus, "electron gate");
  Operator h = identity(kElectronDim);
  const double s = 1.0 / std::sqrt(2.0);
  h(kMsZero, kMsZero) = s;
  h(kMsZero, kMsMinusOne) = s;
  h(kMsMinusOne, kMsZero) = s;
  h(kMsMinusOne, kMsMinusOne) = -s;
  const int targets[] = {offset_e(k)};
  apply_unitary(embed(h, dims(), targets));
}

void Register::entangle(double t) {
  for (int k = 0; k < size(); ++k) require_charge(k, ChargeState::Minus, "entangling gate");
  const Digits g(dims());
  const int n = static_cast<int>(rho_.rows());
  Eigen::VectorXcd phase(n);
  for (int i = 0; i < n; ++i) {
    const double ma = 1.0 - g.digit(i, offset_e(0));
    const double mb = 1.0 - g.digit(i, offset_e(1));
    phase(i) = std::polar(1.0, -kTwoPi * coupling() * t * ma * mb);
  }
  rho_ = phase.asDiagonal() * rho_ * phase.conjugate().asDiagonal();
  wait(t);
}

void Register::correlate(int k) {
  require_charge(k, ChargeState::Minus, "correlate");
  const auto d = dims();
  const int dn = d[offset_n(k)];
  Operator local = identity(kElectronDim * dn);
  const int a = kMsZero * dn + 1;      // |0, down>
  const int b = kMsMinusOne * dn + 1;  // |-1, down>
  local(a, a) = local(b, b) = 0.0;
  local(a, b) = local(b, a) = 1.0;
  const int targets[] = {offset_e(k), offset_n(k)};
  apply_unitary(embed(local, d, targets));
}

int Register::measure_electron(int k, Rng& rng, double* probability) {
  require_charge(k, ChargeState::Minus, "electron readout");
  Operator p0 = Operator::Zero(kElectronDim, kElectronDim);
  p0(kMsZero, kMsZero) = 1.0;
  const int targets[] = {offset_e(k)};
  const Operator proj0 = embed(p0, dims(), targets);
  const double prob0 = std::clamp((proj0 * rho_).trace().real(), 0.0, 1.0);
  const int outcome = rng.uniform() < prob0 ? 0 : 1;
  const Operator proj = outcome == 0 ? proj0 : Operator(identity(static_cast<int>(rho_.rows())) - proj0);
  const double p = outcome == 0 ? prob0 : 1.0 - prob0;
  rho_ = proj * rho_ * proj / p;
  rho_ = 0.5 * (rho_ + rho_.adjoint()).eval();
  if (probability) *probability = p;
  return outcome;
}

void Register::wait(double t) {
  if (!(t >= 0)) throw Error(ErrorCode::InvalidArgument, "wait time must be >= 0");
  if (t == 0) return;
  const Digits g(dims());
  for (int k = 0; k < size(); ++k) {
    const RelaxationParams& r = options_.relaxation.get(charges_[k]);
    const double lambda = std::exp(-t / r.t1_n);
    const double coherence = std::exp(-t / r.t2_n);
    if (lambda < 1.0 || coherence < 1.0) rho_ = local_channel(rho_, g, offset_n(k), lambda, coherence);
    if (charges_[k] == ChargeState::Minus && std::isfinite(r.t1_e)) {
      const double c = std::exp(-t / r.t1_e);
      rho_ = local_channel(rho_, g, offset_e(k), c, c);
    }
  }
}

Operator Register::nuclear_state() const {
  const int keep[] = {offset_n(0), offset_n(1)};
  return partial_trace(rho_, dims(), keep);
}

Operator Register::nuclear_state(int k) const {
  const int keep[] = {offset_n(k)};
  return partial_trace(rho_, dims(), keep);
}

double Register::bell_fidelity() const {
  const Operator rho = nuclear_state();
  const int db = nuclear_spin(nodes_[1].isotope).multiplicity();
  const int n = static_cast<int>(rho.rows());
  auto idx = [&](int a, int b) { return a * db + b; };
  const double s = 1.0 / std::sqrt(2.0);
  double best = 0.0;
  const int pairs[2][2][2] = {{{0, 0}, {1, 1}}, {{0, 1}, {1, 0}}};
  for (const auto& pr : pairs) {
    for (double sign : {1.0, -1.0}) {
      StateVector v = StateVector::Zero(n);
      v(idx(pr[0][0], pr[0][1])) = s;
      v(idx(pr[1][0], pr[1][1])) = sign * s;
      best = std::max(best, (v.adjoint() * rho * v)(0, 0).real());
    }
  }
  return best;
}

double Register::nuclear_coherence(int k) const { return std::abs(nuclear_state(k)(0, 1)); }

std::vector<MeasurementRecord> Register::run_phase(ProtocolPhase phase, Rng& rng, int target) {
  std::vector<MeasurementRecord> records;
  switch (phase) {
    case ProtocolPhase::Initialization:
      laser_init_all();
      for (int k = 0; k < size(); ++k) swap_electron_nuclear(k);
      for (int k = 0; k < size(); ++k) switch_charge(k, ChargeState::Plus);
      break;
    case ProtocolPhase::Operation: {
      for (int k = 0; k < size(); ++k) require_charge(k, ChargeState::Plus, "operation phase");
      if (coupling() == 0.0) {
        throw Error(ErrorCode::InvalidArgument, "operation phase: nodes are not coupled (J = 0)");
      }
      for (int k = 0; k < size(); ++k) switch_charge(k, ChargeState::Minus);
      for (int k = 0; k < size(); ++k) swap_electron_nuclear(k);
      for (int k = 0; k < size(); ++k) electron_hadamard(k);
      entangle(1.0 / (2.0 * std::abs(coupling())));
      electron_hadamard(1);
      for (int k = 0; k < size(); ++k) swap_electron_nuclear(k);
      for (int k = 0; k < size(); ++k) switch_charge(k, ChargeState::Plus);
      break;
    }
    case ProtocolPhase::Readout: {
      if (target < 0 || target >= size()) throw Error(ErrorCode::InvalidArgument, "readout node out of range");
      for (int k = 0; k < size(); ++k) require_charge(k, ChargeState::Plus, "readout phase");
      switch_charge(target, ChargeState::Minus);
      correlate(target);
      MeasurementRecord rec;
      rec.node = nodes_[target].id;
      rec.phase = phase;
      rec.outcome = measure_electron(target, rng, &rec.probability);
      records.push_back(rec);
      switch_charge(target, ChargeState::Plus);
      break;
    }
  }
  return records;
}

double storage_coherence_ratio(const RegisterOptions& options, Isotope isotope, double tau) {
  auto retained = [&](ChargeState storage) {
    std::vector<Node> nodes{{"A", Eigen::Vector3d(0, 0, 0), isotope},
                            {"B", Eigen::Vector3d(0, 0, 20), isotope}};
    RegisterOptions o = options;
    o.dark_attachment = ElectronAttachment::Ground;
    Register reg(nodes, o);
    const int dn = nuclear_spin(isotope).multiplicity();
    StateVector plus = StateVector::Zero(dn);
    plus(0) = plus(1) = 1.0 / std::sqrt(2.0);
    Operator e = Operator::Zero(kElectronDim, kElectronDim);
    e(kMsZero, kMsZero) = 1.0;
    Operator up = Operator::Zero(dn, dn);
    up(0, 0) = 1.0;
    reg.set_state(kron(kron(kron(e, plus * plus.adjoint()), e), up));
    reg.switch_charge(0, storage);
    const double before = reg.nuclear_coherence(0);
    reg.wait(tau);
    return reg.nuclear_coherence(0) / before;
  };
  return retained(ChargeState::Plus) / retained(ChargeState::Minus);
}

}  // namespace nvsim

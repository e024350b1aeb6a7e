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

#include "nvsim/physics.hpp"

#include <cmath>
#include <map>

namespace nvsim {

namespace {

constexpr double kElementaryCharge = 1.602176634e-19;  // C
constexpr double kPlanck = 6.62607015e-34;             // J s
constexpr double kBarn = 1e-28;                        // m^2

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::InvalidArgument, std::string("parameter ") + name + " is not finite");
  }
}

double ladder_plus(SpinQuantum j, Projection m) {
  const double jj = j.value();
  const double mm = m.value();
  return std::sqrt(std::max(0.0, jj * (jj + 1) - mm * (mm + 1)));
}

double ladder_minus(SpinQuantum j, Projection m) {
  const double jj = j.value();
  const double mm = m.value();
  return std::sqrt(std::max(0.0, jj * (jj + 1) - mm * (mm - 1)));
}

}  // namespace

const NucleusParams& PhysicalParams::nucleus(Isotope isotope) const {
  return isotope == Isotope::N14 ? n14 : n15;
}

NucleusParams& PhysicalParams::nucleus(Isotope isotope) {
  return isotope == Isotope::N14 ? n14 : n15;
}

double PhysicalParams::quadrupole(ChargeState charge, Isotope isotope) const {
  if (isotope == Isotope::N15) return 0.0;
  switch (charge) {
    case ChargeState::Minus: return q_minus;
    case ChargeState::Zero: return q_zero;
    case ChargeState::Plus: return q_plus;
  }
  return 0.0;
}

void PhysicalParams::validate() const {
  require_finite(zero_field_splitting, "zero_field_splitting");
  require_finite(gamma_e, "gamma_e");
  require_finite(b_z, "b_z");
  require_finite(q_minus, "q_minus");
  require_finite(q_zero, "q_zero");
  require_finite(q_plus, "q_plus");
  for (const auto* n : {&n14, &n15}) {
    require_finite(n->gamma_n, "gamma_n");
    require_finite(n->a_par, "a_par");
    require_finite(n->a_perp, "a_perp");
    require_finite(n->a_zero, "a_zero");
  }
  if (b_z < 0) throw Error(ErrorCode::InvalidArgument, "b_z must be >= 0");
}

SpaceLayout layout_for(ChargeState charge, Isotope isotope) {
  return SpaceLayout{electron_spin(charge).multiplicity(), nuclear_spin(isotope).multiplicity()};
}

Projection default_sector(ChargeState charge) {
  return charge == ChargeState::Zero ? Projection{-1} : Projection{0};
}

Operator build_hamiltonian(ChargeState charge, Isotope isotope, const PhysicalParams& p) {
  p.validate();
  const auto& nuc = p.nucleus(isotope);
  const SpinOperators i_ops = spin_operators(nuclear_spin(isotope));
  const int dn = i_ops.dim();

  // Nuclear part; the quadrupole term only exists for I >= 1.
  Operator h_nuclear = nuc.gamma_n * p.b_z * i_ops.sz;
  if (nuclear_spin(isotope).twice >= 2) {
    h_nuclear += p.quadrupole(charge, isotope) * i_ops.sz * i_ops.sz;
  }
  if (charge == ChargeState::Plus) return h_nuclear;

  const SpinOperators s_ops = spin_operators(electron_spin(charge));
  const int de = s_ops.dim();
  const Operator ie = identity(de);
  const Operator in = identity(dn);

  Operator h = kron(ie, h_nuclear) + p.gamma_e * p.b_z * kron(s_ops.sz, in);
  if (charge == ChargeState::Minus) {
    h += p.zero_field_splitting * kron(s_ops.sz * s_ops.sz, in);
    h += nuc.a_par * kron(s_ops.sz, i_ops.sz);
    h += 0.5 * nuc.a_perp * (kron(s_ops.s_plus, i_ops.s_minus) + kron(s_ops.s_minus, i_ops.s_plus));
  } else {
    // NV0: S = 1/2, no zero-field term, isotropic hyperfine.
    h += nuc.a_zero * kron(s_ops.sz, i_ops.sz);
    h += 0.5 * nuc.a_zero * (kron(s_ops.s_plus, i_ops.s_minus) + kron(s_ops.s_minus, i_ops.s_plus));
  }
  // Symmetrise away rounding so the Hermiticity invariant is exact.
  return 0.5 * (h + h.adjoint());
}

Operator drive_operator(ChargeState charge, Isotope isotope, const PhysicalParams& p) {
  const auto& nuc = p.nucleus(isotope);
  const SpinOperators i_ops = spin_operators(nuclear_spin(isotope));
  if (charge == ChargeState::Plus) return nuc.gamma_n * i_ops.sx;
  const SpinOperators s_ops = spin_operators(electron_spin(charge));
  return p.gamma_e * kron(s_ops.sx, identity(i_ops.dim())) +
         nuc.gamma_n * kron(identity(s_ops.dim()), i_ops.sx);
}

std::pair<StateVector, StateVector> dressed_states_first_order(const PhysicalParams& p) {
  p.validate();
  const double zeeman = p.gamma_e * p.b_z;
  const double d = p.zero_field_splitting;
  const double scale = std::max(std::abs(zeeman), std::abs(d));
  if (std::abs(zeeman - d) <= 1e-12 * scale || std::abs(zeeman + d) <= 1e-12 * scale) {
    throw Error(ErrorCode::Singular,
                "dressed states: |gamma_e B_z| equals D, first-order admixture diverges");
  }
  const double a_perp = p.n15.a_perp;
  const SpaceLayout layout = layout_for(ChargeState::Minus, Isotope::N15);
  const SpinQuantum s{2};
  const SpinQuantum i{1};
  auto at = [&](int ms2, int mi2) {
    return layout.index(projection_index(s, Projection{ms2}), projection_index(i, Projection{mi2}));
  };

  StateVector up = StateVector::Zero(layout.dim());
  up(at(0, 1)) = 1.0;
  up(at(2, -1)) = -a_perp / (std::sqrt(2.0) * (zeeman + d));
  StateVector down = StateVector::Zero(layout.dim());
  down(at(0, -1)) = 1.0;
  down(at(-2, 1)) = a_perp / (std::sqrt(2.0) * (zeeman - d));
  return {up.normalized(), down.normalized()};
}

double rabi_ratio_closed_form(const PhysicalParams& p, Isotope isotope) {
  p.validate();
  const auto& nuc = p.nucleus(isotope);
  const double zeeman = p.gamma_e * p.b_z;
  const double d = p.zero_field_splitting;
  const double denominator = zeeman * zeeman - d * d;
  if (std::abs(denominator) <= 1e-12 * std::max(zeeman * zeeman, d * d) || nuc.gamma_n == 0.0) {
    throw Error(ErrorCode::Singular, "rabi ratio: gamma_e^2 B_z^2 equals D^2 or gamma_n is zero");
  }
  return 1.0 + (p.gamma_e / nuc.gamma_n) * 2.0 * nuc.a_perp * d / denominator;
}

ProductLabel dominant_label(const StateVector& v, ChargeState charge, Isotope isotope) {
  const SpaceLayout layout = layout_for(charge, isotope);
  Eigen::Index best = 0;
  v.cwiseAbs2().maxCoeff(&best);
  const int e = static_cast<int>(best) / layout.nuclear_dim;
  const int n = static_cast<int>(best) % layout.nuclear_dim;
  return {projection_at(electron_spin(charge), e), projection_at(nuclear_spin(isotope), n)};
}

int eigenstate_index(const Eigensystem& eig, ChargeState charge, Isotope isotope, Projection ms,
                     Projection mi) {
  const SpaceLayout layout = layout_for(charge, isotope);
  const int e = charge == ChargeState::Plus ? 0 : projection_index(electron_spin(charge), ms);
  const int product = layout.index(e, projection_index(nuclear_spin(isotope), mi));
  Eigen::Index best = 0;
  eig.vectors.row(product).cwiseAbs2().maxCoeff(&best);
  return static_cast<int>(best);
}

std::vector<NmrLine> nmr_transition_frequencies(ChargeState charge, Isotope isotope,
                                                Projection electron_sector,
                                                const PhysicalParams& p) {
  const SpinQuantum s = electron_spin(charge);
  if (charge != ChargeState::Plus && !projection_valid(s, electron_sector)) {
    throw Error(ErrorCode::InvalidArgument,
                "electron sector m_S = " + format_projection(electron_sector) +
                    " does not exist in charge state " + std::string(to_string(charge)));
  }
  const Eigensystem eig = diagonalize(build_hamiltonian(charge, isotope, p));
  std::map<int, int> by_mi;  // 2 m_I -> eigen index
  for (int k = 0; k < eig.dim(); ++k) {
    const ProductLabel label = dominant_label(eig.vectors.col(k), charge, isotope);
    if (charge != ChargeState::Plus && label.ms != electron_sector) continue;
    by_mi[label.mi.twice] = k;
  }
  const SpinQuantum i = nuclear_spin(isotope);
  if (static_cast<int>(by_mi.size()) != i.multiplicity()) {
    throw Error(ErrorCode::Singular, "nmr lines: eigenstates are too strongly mixed to label");
  }
  std::vector<NmrLine> lines;
  for (int m2 = i.twice; m2 > -i.twice; m2 -= 2) {
    const int a = by_mi.at(m2);
    const int b = by_mi.at(m2 - 2);
    lines.push_back({Projection{m2}, Projection{m2 - 2}, eig.values(a) - eig.values(b), a, b});
  }
  return lines;
}

double hyperfine_shift_second_order(ChargeState charge, Isotope isotope, Projection ms,
                                    Projection mi, const PhysicalParams& p) {
  if (charge == ChargeState::Plus) return 0.0;
  const auto& nuc = p.nucleus(isotope);
  const SpinQuantum s = electron_spin(charge);
  const SpinQuantum i = nuclear_spin(isotope);
  const double transverse = charge == ChargeState::Minus ? nuc.a_perp : nuc.a_zero;
  const double longitudinal = charge == ChargeState::Minus ? nuc.a_par : nuc.a_zero;
  const double d = charge == ChargeState::Minus ? p.zero_field_splitting : 0.0;
  const double q = p.quadrupole(charge, isotope);

  auto energy = [&](Projection a, Projection b) {
    const double m_s = a.value();
    const double m_i = b.value();
    return d * m_s * m_s + p.gamma_e * p.b_z * m_s + q * m_i * m_i + nuc.gamma_n * p.b_z * m_i +
           longitudinal * m_s * m_i;
  };
  const double e0 = energy(ms, mi);
  double shift = 0.0;
  // S+ I- partner.
  if (projection_valid(s, Projection{ms.twice + 2}) && projection_valid(i, Projection{mi.twice - 2})) {
    const double v = 0.5 * transverse * ladder_plus(s, ms) * ladder_minus(i, mi);
    shift += v * v / (e0 - energy(Projection{ms.twice + 2}, Projection{mi.twice - 2}));
  }
  // S- I+ partner.
  if (projection_valid(s, Projection{ms.twice - 2}) && projection_valid(i, Projection{mi.twice + 2})) {
    const double v = 0.5 * transverse * ladder_minus(s, ms) * ladder_plus(i, mi);
    shift += v * v / (e0 - energy(Projection{ms.twice - 2}, Projection{mi.twice + 2}));
  }
  return shift;
}

double quadrupole_from_efg(double v_zz, double q_barn) {
  if (!std::isfinite(v_zz) || !std::isfinite(q_barn)) {
    throw Error(ErrorCode::InvalidArgument, "quadrupole_from_efg: non-finite input");
  }
  return 3.0 * kElementaryCharge * q_barn * kBarn * v_zz / (4.0 * kPlanck) * 1e-6;
}

double efg_from_quadrupole(double cq_mhz, double q_barn) {
  if (!std::isfinite(cq_mhz) || !std::isfinite(q_barn) || q_barn == 0.0) {
    throw Error(ErrorCode::InvalidArgument, "efg_from_quadrupole: bad input");
  }
  return cq_mhz * 1e6 * 4.0 * kPlanck / (3.0 * kElementaryCharge * q_barn * kBarn);
}

}  // namespace nvsim

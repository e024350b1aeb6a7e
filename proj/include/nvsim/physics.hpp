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

#include <utility>
#include <vector>

#include "nvsim/linalg.hpp"
#include "nvsim/spin.hpp"
#include "nvsim/types.hpp"

namespace nvsim {

/// Nitrogen-specific constants. gamma_n follows the Hamiltonian sign convention
/// H^n = gamma_n * B_z * I_z (reduced ratio, opposite to the physical sign).
struct NucleusParams {
  double gamma_n = 0.0;  ///< MHz/T
  double a_par = 0.0;    ///< MHz, NV- longitudinal hyperfine
  double a_perp = 0.0;   ///< MHz, NV- transverse hyperfine
  double a_zero = 0.0;   ///< MHz, NV0 isotropic hyperfine
};

struct PhysicalParams {
  double zero_field_splitting = 2870.0;  ///< D, MHz
  double gamma_e = 28024.0;              ///< MHz/T
  double b_z = 0.470;                    ///< T
  NucleusParams n14{-3.0766, -2.14, -2.630, -1.426};
  NucleusParams n15{4.3156, 3.03, 3.689, 2.0};
  double q_minus = -4.945;  ///< MHz, 14N only
  double q_zero = -4.655;
  double q_plus = -4.619;

  const NucleusParams& nucleus(Isotope isotope) const;
  NucleusParams& nucleus(Isotope isotope);
  /// Quadrupole coupling for `charge`; zero for 15N.
  double quadrupole(ChargeState charge, Isotope isotope) const;
  void validate() const;
};

/// Electron x nuclear product layout of the Hilbert space for one charge state.
/// NV+ has electron_dim = 1.
struct SpaceLayout {
  int electron_dim = 1;
  int nuclear_dim = 1;

  int dim() const { return electron_dim * nuclear_dim; }
  int index(int electron, int nuclear) const { return electron * nuclear_dim + nuclear; }
  friend bool operator==(SpaceLayout, SpaceLayout) = default;
};

SpaceLayout layout_for(ChargeState charge, Isotope isotope);

Operator build_hamiltonian(ChargeState charge, Isotope isotope, const PhysicalParams& p);

/// RF/MW coupling per unit field: gamma_e*Sx + gamma_n*Ix (electron term absent for NV+).
Operator drive_operator(ChargeState charge, Isotope isotope, const PhysicalParams& p);

/// First-order dressed |0,up> and |0,down> for NV- with 15N, normalised,
/// in the layout_for(Minus, N15) basis.
std::pair<StateVector, StateVector> dressed_states_first_order(const PhysicalParams& p);

/// 1 + (gamma_e/gamma_n) * 2 A_perp D / (gamma_e^2 B_z^2 - D^2).
double rabi_ratio_closed_form(const PhysicalParams& p, Isotope isotope = Isotope::N15);

struct NmrLine {
  Projection upper;  ///< m_I of the first state (larger m_I)
  Projection lower;  ///< m_I - 1
  double frequency;  ///< E(upper) - E(lower), signed, MHz
  int upper_state;   ///< eigenvector index
  int lower_state;
};

/// Adjacent-m_I nuclear transitions inside one electron sector.
/// The sector is ignored for NV+.
std::vector<NmrLine> nmr_transition_frequencies(ChargeState charge, Isotope isotope,
                                                Projection electron_sector,
                                                const PhysicalParams& p);

/// Product-basis label (m_S, m_I) of an eigenvector: its dominant component.
struct ProductLabel {
  Projection ms;
  Projection mi;
};
ProductLabel dominant_label(const StateVector& v, ChargeState charge, Isotope isotope);

/// Index of the eigenvector dominated by |ms, mi>.
int eigenstate_index(const Eigensystem& eig, ChargeState charge, Isotope isotope, Projection ms,
                     Projection mi);

/// Second-order energy shift of |ms, mi> from the transverse hyperfine terms
/// (A_perp for NV-, isotropic a_zero for NV0; zero for NV+).
double hyperfine_shift_second_order(ChargeState charge, Isotope isotope, Projection ms,
                                    Projection mi, const PhysicalParams& p);

/// Quadrupole splitting 3 e Q_N V_zz / (4 h) in MHz; V_zz in V/m^2, Q_N in barn.
double quadrupole_from_efg(double v_zz, double q_barn);
/// Inverse of quadrupole_from_efg for V_zz.
double efg_from_quadrupole(double cq_mhz, double q_barn);

/// Electron spin sector a nuclear probe uses by default: m_S = 0 for NV- and
/// NV+, m_S = -1/2 for NV0.
Projection default_sector(ChargeState charge);

}  // namespace nvsim

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

#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace nvsim {

// Units used throughout the library:
//   frequency  MHz        time     microseconds
//   field      tesla      voltage  volts
//   length     nanometres
// Hamiltonians are in plain frequency units; 2*pi only appears in propagators.

using Complex = std::complex<double>;
using Operator = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

inline constexpr double kMicrosecondsPerMillisecond = 1e3;
inline constexpr double kMicrosecondsPerSecond = 1e6;

enum class ErrorCode {
  InvalidArgument = 1,
  DimensionMismatch,
  Singular,
  NotHermitian,
  Parse,
  Compile,
  Config,
  Fit,
  Capability,
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Syntax error in a pulse program, with 1-based position.
class ParseError : public Error {
 public:
  ParseError(int line, int column, const std::string& message);
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

enum class ChargeState { Minus, Zero, Plus };
enum class Isotope { N14, N15 };

inline constexpr ChargeState kAllChargeStates[] = {ChargeState::Minus, ChargeState::Zero,
                                                   ChargeState::Plus};

/// Spin quantum number stored as 2S so half-integers stay exact.
struct SpinQuantum {
  int twice = 0;

  double value() const { return 0.5 * twice; }
  int multiplicity() const { return twice + 1; }
  friend bool operator==(SpinQuantum, SpinQuantum) = default;
};

/// Magnetic quantum number stored as 2m.
struct Projection {
  int twice = 0;

  double value() const { return 0.5 * twice; }
  friend bool operator==(Projection, Projection) = default;
  friend auto operator<=>(Projection, Projection) = default;
};

SpinQuantum electron_spin(ChargeState charge);
SpinQuantum nuclear_spin(Isotope isotope);

/// Index of projection m in the basis ordered m = +S, S-1, ..., -S.
int projection_index(SpinQuantum spin, Projection m);
Projection projection_at(SpinQuantum spin, int index);
bool projection_valid(SpinQuantum spin, Projection m);

std::string_view to_string(ChargeState charge);
std::string_view to_string(Isotope isotope);
ChargeState parse_charge_state(std::string_view text);
Isotope parse_isotope(std::string_view text);

/// Formats 2m as "+1/2", "-1", "0".
std::string format_projection(Projection m);
/// Parses "+1/2", "-1/2", "1", "0", "-1".
Projection parse_projection(std::string_view text);

}  // namespace nvsim

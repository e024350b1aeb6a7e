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

#include "nvsim/types.hpp"

#include <charconv>
#include <cstdlib>

namespace nvsim {

ParseError::ParseError(int line, int column, const std::string& message)
    : Error(ErrorCode::Parse,
            "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

SpinQuantum electron_spin(ChargeState charge) {
  switch (charge) {
    case ChargeState::Minus: return {2};
    case ChargeState::Zero: return {1};
    case ChargeState::Plus: return {0};
  }
  throw Error(ErrorCode::InvalidArgument, "unknown charge state");
}

SpinQuantum nuclear_spin(Isotope isotope) {
  switch (isotope) {
    case Isotope::N14: return {2};
    case Isotope::N15: return {1};
  }
  throw Error(ErrorCode::InvalidArgument, "unknown isotope");
}

bool projection_valid(SpinQuantum spin, Projection m) {
  return std::abs(m.twice) <= spin.twice && (spin.twice - m.twice) % 2 == 0;
}

int projection_index(SpinQuantum spin, Projection m) {
  if (!projection_valid(spin, m)) {
    throw Error(ErrorCode::InvalidArgument, "projection " + format_projection(m) +
                                                " is not valid for spin " +
                                                format_projection(Projection{spin.twice}));
  }
  return (spin.twice - m.twice) / 2;
}

Projection projection_at(SpinQuantum spin, int index) { return Projection{spin.twice - 2 * index}; }

std::string_view to_string(ChargeState charge) {
  switch (charge) {
    case ChargeState::Minus: return "minus";
    case ChargeState::Zero: return "zero";
    case ChargeState::Plus: return "plus";
  }
  return "?";
}

std::string_view to_string(Isotope isotope) { return isotope == Isotope::N14 ? "n14" : "n15"; }

ChargeState parse_charge_state(std::string_view text) {
  if (text == "minus" || text == "NV-") return ChargeState::Minus;
  if (text == "zero" || text == "NV0") return ChargeState::Zero;
  if (text == "plus" || text == "NV+") return ChargeState::Plus;
  throw Error(ErrorCode::InvalidArgument, "unknown charge state '" + std::string(text) + "'");
}

Isotope parse_isotope(std::string_view text) {
  if (text == "n14" || text == "14N") return Isotope::N14;
  if (text == "n15" || text == "15N") return Isotope::N15;
  throw Error(ErrorCode::InvalidArgument, "unknown isotope '" + std::string(text) + "'");
}

std::string format_projection(Projection m) {
  if (m.twice == 0) return "0";
  std::string sign = m.twice > 0 ? "+" : "-";
  int magnitude = std::abs(m.twice);
  if (magnitude % 2 == 0) return sign + std::to_string(magnitude / 2);
  return sign + std::to_string(magnitude) + "/2";
}

Projection parse_projection(std::string_view text) {
  auto fail = [&] {
    return Error(ErrorCode::InvalidArgument, "bad spin projection '" + std::string(text) + "'");
  };
  if (text.empty()) throw fail();
  int sign = 1;
  if (text.front() == '+' || text.front() == '-') {
    sign = text.front() == '-' ? -1 : 1;
    text.remove_prefix(1);
  }
  auto slash = text.find('/');
  int numerator = 0;
  auto num_text = text.substr(0, slash);
  auto [ptr, ec] = std::from_chars(num_text.data(), num_text.data() + num_text.size(), numerator);
  if (ec != std::errc{} || ptr != num_text.data() + num_text.size()) throw fail();
  if (slash == std::string_view::npos) return Projection{sign * 2 * numerator};
  if (text.substr(slash + 1) != "2") throw fail();
  return Projection{sign * numerator};
}

}  // namespace nvsim

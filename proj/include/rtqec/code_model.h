// Copyright 2026 The rtqec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RTQEC_CODE_MODEL_H
#define RTQEC_CODE_MODEL_H

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace rtqec {

/// Preparation / measurement basis of the logical qubit.
enum class Basis : uint8_t { Z = 0, X = 1 };

/// Stabilizer flavour. A Z-type stabilizer detects X errors and vice versa.
enum class StabilizerType : uint8_t { Z = 0, X = 1 };

/// Single-qubit Pauli axis used for corrections and injected rotations.
enum class PauliAxis : uint8_t { X = 0, Z = 1 };

char basis_char(Basis b);
Basis parse_basis(std::string_view text);
char type_char(StabilizerType t);
char axis_char(PauliAxis a);
PauliAxis parse_axis(std::string_view text);

/// The stabilizer type whose final-round values come out of a transversal
/// data measurement in `b` (Z basis -> Z-type stabilizers).
constexpr StabilizerType measured_type(Basis b) {
    return b == Basis::Z ? StabilizerType::Z : StabilizerType::X;
}

/// Stabilizer type that anticommutes with a single-qubit Pauli on `a`.
constexpr StabilizerType detecting_type(PauliAxis a) {
    return a == PauliAxis::X ? StabilizerType::Z : StabilizerType::X;
}

inline constexpr int kNoPartner = -1;

struct Ancilla {
    uint32_t index;  // 0-based; label is A{index+1}
    StabilizerType type;
    int face_row;  // face coordinates on the (d+1)x(d+1) plaquette grid
    int face_col;
    std::vector<uint32_t> support;  // 0-based data indices, ascending
    /// Data partner per CNOT layer, or kNoPartner. X-type ancillas visit
    /// NW, NE, SW, SE; Z-type ancillas visit NW, SW, NE, SE. A mid-cycle
    /// ancilla fault then spreads to a horizontal XX or a vertical ZZ pair,
    /// perpendicular to the logical of the same Pauli type.
    std::array<int, 4> schedule;
};

/// Rotated surface-code layout for odd distance d.
///
/// Data qubits are numbered row-major (D1..D{d*d}). Plaquette faces sit on a
/// (d+1)x(d+1) grid between data qubits; face (i, j) is Z-type when i+j is
/// even. Weight-2 Z stabilizers live on the left/right boundaries and weight-2
/// X stabilizers on the top/bottom boundaries. Ancillas are numbered row-major
/// over the faces, which reproduces the A1..A8 labels at d=3 with Z-type
/// ancillas A2, A4, A5, A7. Z_L runs along the top row and X_L along the right
/// column, so they meet at the top-right corner.
class CodeLayout {
   public:
    explicit CodeLayout(int distance);

    int distance() const {
        return distance_;
    }
    size_t num_data() const {
        return static_cast<size_t>(distance_) * distance_;
    }
    size_t num_ancillas() const {
        return ancillas_.size();
    }
    size_t num_qubits() const {
        return num_data() + num_ancillas();
    }
    /// Per-type stabilizer count, (d*d-1)/2.
    size_t stabilizers_per_type() const {
        return num_ancillas() / 2;
    }

    const std::vector<Ancilla>& ancillas() const {
        return ancillas_;
    }
    const Ancilla& ancilla(size_t index) const {
        return ancillas_.at(index);
    }
    /// Global ancilla indices of one type, ascending.
    std::span<const uint32_t> ancillas_of_type(StabilizerType t) const {
        return t == StabilizerType::Z ? z_ancillas_ : x_ancillas_;
    }
    /// Position of a global ancilla index inside ancillas_of_type(its type).
    size_t position_in_type(uint32_t ancilla_index) const {
        return position_in_type_.at(ancilla_index);
    }

    const std::vector<uint32_t>& logical_z_support() const {
        return logical_z_;
    }
    const std::vector<uint32_t>& logical_x_support() const {
        return logical_x_;
    }
    /// Support of the logical operator read out by a measurement in `b`.
    const std::vector<uint32_t>& logical_support(Basis b) const {
        return b == Basis::Z ? logical_z_ : logical_x_;
    }

    /// Stabilizers (global ancilla indices) of type `t` that contain `data`.
    std::vector<uint32_t> stabilizers_touching(uint32_t data, StabilizerType t) const;

    static std::string data_label(uint32_t data);
    static std::string ancilla_label(uint32_t ancilla);
    /// Parses "D3" / "A2" style labels; returns {is_ancilla, 0-based index}.
    static std::pair<bool, uint32_t> parse_label(std::string_view label);

    nlohmann::json to_json() const;

   private:
    int distance_;
    std::vector<Ancilla> ancillas_;
    std::vector<uint32_t> z_ancillas_;
    std::vector<uint32_t> x_ancillas_;
    std::vector<size_t> position_in_type_;
    std::vector<uint32_t> logical_z_;
    std::vector<uint32_t> logical_x_;
};

/// Validating constructor wrapper. Throws std::invalid_argument unless
/// distance is odd and at least 3.
CodeLayout build_layout(int distance);

}  // namespace rtqec

#endif

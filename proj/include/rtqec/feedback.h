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

#ifndef RTQEC_FEEDBACK_H
#define RTQEC_FEEDBACK_H

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rtqec/code_model.h"
#include "rtqec/syndrome.h"

namespace rtqec {

/// Tracked signs of the logical operators.
struct PauliFrame {
    int sign_x = +1;  // sign of X_L
    int sign_z = +1;  // sign of Z_L

    /// Sign of the logical read out by a measurement in `b`.
    int sign(Basis b) const {
        return b == Basis::Z ? sign_z : sign_x;
    }
    bool identity() const {
        return sign_x == 1 && sign_z == 1;
    }
    bool operator==(const PauliFrame&) const = default;
};

/// Cost of one frame update at the 250 MHz fabric clock.
inline constexpr uint32_t kPfuLatencyNs = 4;

/// `verdict_x` toggles sign_x (a Z-type error chain flipped X_L), `verdict_z`
/// toggles sign_z.
PauliFrame apply_verdict(PauliFrame frame, bool verdict_x, bool verdict_z);

struct FeedbackPulse {
    uint32_t data;    // 0-based data qubit
    PauliAxis gate;   // physical X or Z
    double time_ns;   // scheduled start

    bool operator==(const FeedbackPulse&) const = default;
};

struct FeedbackPlan {
    std::vector<FeedbackPulse> pulses;
    std::vector<CancellationInstruction> cancellations;

    bool empty() const {
        return pulses.empty();
    }
    nlohmann::json to_json() const;
};

/// Data qubits at the ends of the logical strings: X pulses go to D1 (top-left,
/// on Z_L) and Z pulses to D{d*d} (bottom-right, on X_L).
struct RepresentativeQubits {
    uint32_t x_target;
    uint32_t z_target;
};
RepresentativeQubits representative_qubits(const CodeLayout& layout);

/// Emits a pulse for every negative sign and returns the restored frame.
/// Cancellations address `next_round` (rounds+1 is the final frame), one per
/// stabilizer anticommuting with the pulse.
std::pair<FeedbackPlan, PauliFrame> plan_feedback(
    const PauliFrame& frame, const CodeLayout& layout, uint32_t next_round, double time_ns = 0.0);

/// Final-round decoder hook: maps the final frame to the decoder's verdict.
using FinalVerdictFn = std::function<bool(const FinalFrame&)>;

/// Logical eigenvalue (+1 or -1) after the final Pauli-frame update:
/// raw parity of the data bits on the measured logical, times the tracked
/// sign, times the final-round verdict when `decoder` is set. Throws
/// std::invalid_argument if `final_frame` is not of the measured type.
int final_pfu(
    const PauliFrame& frame,
    const FinalFrame& final_frame,
    const CodeLayout& layout,
    Basis basis,
    std::span<const uint8_t> data_bits,
    const FinalVerdictFn& decoder = {});

/// Parity of the data bits on the logical measured in `basis`.
bool raw_logical_parity(const CodeLayout& layout, Basis basis, std::span<const uint8_t> data_bits);

}  // namespace rtqec

#endif

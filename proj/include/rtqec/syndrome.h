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

#ifndef RTQEC_SYNDROME_H
#define RTQEC_SYNDROME_H

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "rtqec/code_model.h"
#include "rtqec/noise_sim.h"

namespace rtqec {

/// Preprocessing cost per round at the 250 MHz fabric clock.
inline constexpr uint32_t kSyndromeCycles = 5;
inline constexpr uint32_t kClockPeriodNs = 4;

/// Request to XOR 1 into one defect bit, issued when a feedback gate flips a
/// stabilizer on purpose. `round` is the round whose defect is cancelled;
/// rounds+1 addresses the final-measurement frame.
struct CancellationInstruction {
    uint32_t round;
    uint32_t ancilla;  // global ancilla index

    bool operator==(const CancellationInstruction&) const = default;
};

/// Per-type register file of the preprocessing stage. Only the previous
/// ancilla bits and stabilizer values are kept.
class SyndromeFrame {
   public:
    SyndromeFrame(const CodeLayout& layout, StabilizerType type);

    StabilizerType type() const {
        return type_;
    }
    uint32_t round() const {
        return round_;
    }
    std::span<const uint32_t> ancillas() const {
        return layout_->ancillas_of_type(type_);
    }
    /// a_n^i for this type, in ancillas() order.
    const std::vector<uint8_t>& ancilla_bits() const {
        return a_;
    }
    /// s_n^i.
    const std::vector<uint8_t>& stabilizer_values() const {
        return s_;
    }
    /// x_n^i after cancellation.
    const std::vector<uint8_t>& defects() const {
        return x_;
    }
    /// Cycles charged for producing this frame.
    uint32_t latency_cycles() const {
        return latency_cycles_;
    }
    const CodeLayout& layout() const {
        return *layout_;
    }

   private:
    friend std::pair<SyndromeFrame, SyndromeFrame> init_frames(
        const CodeLayout&, Basis, std::span<const uint8_t>, std::span<const CancellationInstruction>);
    friend SyndromeFrame step(
        const SyndromeFrame&, uint32_t, std::span<const uint8_t>, std::span<const CancellationInstruction>);

    void apply_cancellations(std::span<const CancellationInstruction> pending);

    const CodeLayout* layout_;
    StabilizerType type_;
    uint32_t round_ = 0;
    uint32_t latency_cycles_ = 0;
    std::vector<uint8_t> a_;
    std::vector<uint8_t> s_;
    std::vector<uint8_t> x_;
};

/// Stabilizers and defects derived from the transversal data readout.
struct FinalFrame {
    StabilizerType type;
    std::vector<uint8_t> stabilizer_values;  // s_m^i
    std::vector<uint8_t> defects;            // x_m^i

    bool operator==(const FinalFrame&) const = default;
};

/// First round with a_0 = 0. The stabilizers of the preparation basis start
/// from s_0 = 0; the complementary ones start from s_0 = s_1 so their first
/// defects vanish. `first_round_bits` covers all d*d-1 ancillas.
/// Returns (Z-type frame, X-type frame).
std::pair<SyndromeFrame, SyndromeFrame> init_frames(
    const CodeLayout& layout,
    Basis basis,
    std::span<const uint8_t> first_round_bits,
    std::span<const CancellationInstruction> pending = {});

/// s_n = a_n XOR a_{n-1}; x_n = s_n XOR s_{n-1}; then XOR 1 for each pending
/// instruction addressed to (round, ancilla of this type). `round` must be
/// frame.round() + 1.
SyndromeFrame step(
    const SyndromeFrame& frame,
    uint32_t round,
    std::span<const uint8_t> ancilla_bits,
    std::span<const CancellationInstruction> pending = {});

/// s_m = parity of the data bits on each stabilizer, x_m = s_n XOR s_m. The
/// frame must be of the type measured by `basis`. Pending instructions
/// addressed to frame.round() + 1 apply here.
FinalFrame finalize(
    const SyndromeFrame& frame,
    std::span<const uint8_t> data_bits,
    Basis basis,
    std::span<const CancellationInstruction> pending = {});

struct RoundDefects {
    uint32_t round;
    std::vector<uint8_t> z;
    std::vector<uint8_t> x;

    const std::vector<uint8_t>& of(StabilizerType t) const {
        return t == StabilizerType::Z ? z : x;
    }
};

/// Both frames of one logical qubit driven round by round.
class SyndromeStream {
   public:
    SyndromeStream(const CodeLayout& layout, Basis basis);

    RoundDefects push(std::span<const uint8_t> ancilla_bits, std::span<const CancellationInstruction> pending = {});
    FinalFrame finalize(std::span<const uint8_t> data_bits, std::span<const CancellationInstruction> pending = {}) const;

    uint32_t round() const {
        return z_ ? z_->round() : 0;
    }
    const SyndromeFrame& frame(StabilizerType t) const;
    /// Total preprocessing cycles charged so far.
    uint64_t cycles() const {
        return cycles_;
    }

   private:
    const CodeLayout* layout_;
    Basis basis_;
    std::optional<SyndromeFrame> z_;
    std::optional<SyndromeFrame> x_;
    uint64_t cycles_ = 0;
};

/// All defects of one recorded shot.
struct DefectHistory {
    uint32_t rounds = 0;
    size_t per_type = 0;
    Basis basis = Basis::Z;
    std::vector<uint8_t> z;  // rounds x per_type
    std::vector<uint8_t> x;  // rounds x per_type
    FinalFrame final_frame;  // measured type only

    std::span<const uint8_t> round(StabilizerType t, uint32_t n) const {
        const auto& v = t == StabilizerType::Z ? z : x;
        return std::span<const uint8_t>(v).subspan((n - 1) * per_type, per_type);
    }
};

DefectHistory compute_defects(const CodeLayout& layout, const ShotRecord& shot);

}  // namespace rtqec

#endif

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

#include "rtqec/syndrome.h"

#include <stdexcept>
#include <string>

namespace rtqec {

namespace {

void check_width(const CodeLayout& layout, std::span<const uint8_t> bits) {
    if (bits.size() != layout.num_ancillas()) {
        throw std::invalid_argument(
            "expected " + std::to_string(layout.num_ancillas()) + " ancilla bits, got " + std::to_string(bits.size()));
    }
}

}  // namespace

SyndromeFrame::SyndromeFrame(const CodeLayout& layout, StabilizerType type) : layout_(&layout), type_(type) {
    const size_t k = layout.stabilizers_per_type();
    a_.assign(k, 0);
    s_.assign(k, 0);
    x_.assign(k, 0);
}

void SyndromeFrame::apply_cancellations(std::span<const CancellationInstruction> pending) {
    for (const auto& c : pending) {
        if (c.round != round_ || c.ancilla >= layout_->num_ancillas()) {
            continue;
        }
        if (layout_->ancilla(c.ancilla).type != type_) {
            continue;
        }
        x_[layout_->position_in_type(c.ancilla)] ^= 1;
    }
}

std::pair<SyndromeFrame, SyndromeFrame> init_frames(
    const CodeLayout& layout,
    Basis basis,
    std::span<const uint8_t> first_round_bits,
    std::span<const CancellationInstruction> pending) {
    check_width(layout, first_round_bits);
    SyndromeFrame z(layout, StabilizerType::Z);
    SyndromeFrame x(layout, StabilizerType::X);
    const StabilizerType prepared = measured_type(basis);
    for (SyndromeFrame* f : {&z, &x}) {
        f->round_ = 1;
        f->latency_cycles_ = kSyndromeCycles;
        const auto anc = f->ancillas();
        for (size_t i = 0; i < anc.size(); ++i) {
            const uint8_t a1 = first_round_bits[anc[i]] & 1;
            const uint8_t s1 = a1;  // a_0 = 0
            const uint8_t s0 = f->type_ == prepared ? 0 : s1;
            f->a_[i] = a1;
            f->s_[i] = s1;
            f->x_[i] = s1 ^ s0;
        }
        f->apply_cancellations(pending);
    }
    return {std::move(z), std::move(x)};
}

SyndromeFrame step(
    const SyndromeFrame& frame,
    uint32_t round,
    std::span<const uint8_t> ancilla_bits,
    std::span<const CancellationInstruction> pending) {
    if (round != frame.round() + 1) {
        throw std::invalid_argument(
            "round discontinuity: frame at round " + std::to_string(frame.round()) + ", got round " + std::to_string(round));
    }
    if (frame.round() == 0) {
        throw std::invalid_argument("frame not initialized; call init_frames for round 1");
    }
    check_width(frame.layout(), ancilla_bits);
    SyndromeFrame next = frame;
    next.round_ = round;
    next.latency_cycles_ = kSyndromeCycles;
    const auto anc = frame.ancillas();
    for (size_t i = 0; i < anc.size(); ++i) {
        const uint8_t a = ancilla_bits[anc[i]] & 1;
        const uint8_t s = a ^ frame.a_[i];
        next.x_[i] = s ^ frame.s_[i];
        next.a_[i] = a;
        next.s_[i] = s;
    }
    next.apply_cancellations(pending);
    return next;
}

FinalFrame finalize(
    const SyndromeFrame& frame,
    std::span<const uint8_t> data_bits,
    Basis basis,
    std::span<const CancellationInstruction> pending) {
    if (frame.type() != measured_type(basis)) {
        throw std::invalid_argument(
            std::string("basis mismatch: a ") + basis_char(basis) + "-basis readout finalizes the " +
            type_char(measured_type(basis)) + "-type frame, got " + type_char(frame.type()));
    }
    const auto& layout = frame.layout();
    if (data_bits.size() != layout.num_data()) {
        throw std::invalid_argument("expected " + std::to_string(layout.num_data()) + " data bits");
    }
    FinalFrame out;
    out.type = frame.type();
    const auto anc = frame.ancillas();
    out.stabilizer_values.resize(anc.size());
    out.defects.resize(anc.size());
    for (size_t i = 0; i < anc.size(); ++i) {
        uint8_t s = 0;
        for (uint32_t q : layout.ancilla(anc[i]).support) {
            s ^= data_bits[q] & 1;
        }
        out.stabilizer_values[i] = s;
        out.defects[i] = s ^ frame.stabilizer_values()[i];
    }
    const uint32_t final_round = frame.round() + 1;
    for (const auto& c : pending) {
        if (c.round == final_round && c.ancilla < layout.num_ancillas() && layout.ancilla(c.ancilla).type == out.type) {
            out.defects[layout.position_in_type(c.ancilla)] ^= 1;
        }
    }
    return out;
}

SyndromeStream::SyndromeStream(const CodeLayout& layout, Basis basis) : layout_(&layout), basis_(basis) {
}

RoundDefects SyndromeStream::push(std::span<const uint8_t> ancilla_bits, std::span<const CancellationInstruction> pending) {
    if (!z_) {
        auto [z, x] = init_frames(*layout_, basis_, ancilla_bits, pending);
        z_.emplace(std::move(z));
        x_.emplace(std::move(x));
    } else {
        const uint32_t next = z_->round() + 1;
        z_.emplace(step(*z_, next, ancilla_bits, pending));
        x_.emplace(step(*x_, next, ancilla_bits, pending));
    }
    // Both types are processed in parallel by the same pipeline stage.
    cycles_ += kSyndromeCycles;
    return RoundDefects{z_->round(), z_->defects(), x_->defects()};
}

FinalFrame SyndromeStream::finalize(std::span<const uint8_t> data_bits, std::span<const CancellationInstruction> pending) const {
    if (!z_) {
        throw std::logic_error("finalize before any stabilizer round");
    }
    return rtqec::finalize(frame(measured_type(basis_)), data_bits, basis_, pending);
}

const SyndromeFrame& SyndromeStream::frame(StabilizerType t) const {
    if (!z_) {
        throw std::logic_error("no stabilizer round processed yet");
    }
    return t == StabilizerType::Z ? *z_ : *x_;
}

DefectHistory compute_defects(const CodeLayout& layout, const ShotRecord& shot) {
    if (shot.distance != layout.distance()) {
        throw std::invalid_argument("shot distance does not match layout");
    }
    DefectHistory h;
    h.rounds = shot.rounds;
    h.per_type = layout.stabilizers_per_type();
    h.basis = shot.basis;
    h.z.reserve(h.rounds * h.per_type);
    h.x.reserve(h.rounds * h.per_type);
    SyndromeStream stream(layout, shot.basis);
    for (uint32_t n = 1; n <= shot.rounds; ++n) {
        auto d = stream.push(shot.round_bits(n));
        h.z.insert(h.z.end(), d.z.begin(), d.z.end());
        h.x.insert(h.x.end(), d.x.begin(), d.x.end());
    }
    h.final_frame = stream.finalize(shot.data_bits);
    return h;
}

}  // namespace rtqec

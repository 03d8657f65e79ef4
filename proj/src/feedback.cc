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

#include "rtqec/feedback.h"

#include <stdexcept>
#include <string>

namespace rtqec {

PauliFrame apply_verdict(PauliFrame frame, bool verdict_x, bool verdict_z) {
    if (verdict_x) frame.sign_x = -frame.sign_x;
    if (verdict_z) frame.sign_z = -frame.sign_z;
    return frame;
}

nlohmann::json FeedbackPlan::to_json() const {
    nlohmann::json events = nlohmann::json::array();
    for (const auto& p : pulses) {
        events.push_back({{"event", "pulse"},
                          {"target", CodeLayout::data_label(p.data)},
                          {"gate", std::string(1, axis_char(p.gate))},
                          {"time_ns", p.time_ns}});
    }
    for (const auto& c : cancellations) {
        events.push_back({{"event", "cancel"}, {"ancilla", CodeLayout::ancilla_label(c.ancilla)}, {"round", c.round}});
    }
    return events;
}

RepresentativeQubits representative_qubits(const CodeLayout& layout) {
    return {0u, static_cast<uint32_t>(layout.num_data() - 1)};
}

std::pair<FeedbackPlan, PauliFrame> plan_feedback(
    const PauliFrame& frame, const CodeLayout& layout, uint32_t next_round, double time_ns) {
    FeedbackPlan plan;
    const auto targets = representative_qubits(layout);
    auto emit = [&](uint32_t data, PauliAxis gate) {
        plan.pulses.push_back({data, gate, time_ns});
        for (uint32_t a : layout.stabilizers_touching(data, detecting_type(gate))) {
            plan.cancellations.push_back({next_round, a});
        }
    };
    if (frame.sign_z < 0) emit(targets.x_target, PauliAxis::X);
    if (frame.sign_x < 0) emit(targets.z_target, PauliAxis::Z);
    return {std::move(plan), PauliFrame{}};
}

bool raw_logical_parity(const CodeLayout& layout, Basis basis, std::span<const uint8_t> data_bits) {
    if (data_bits.size() != layout.num_data()) {
        throw std::invalid_argument("data bit count does not match the layout");
    }
    uint8_t p = 0;
    for (uint32_t q : layout.logical_support(basis)) p ^= data_bits[q];
    return p & 1;
}

int final_pfu(
    const PauliFrame& frame,
    const FinalFrame& final_frame,
    const CodeLayout& layout,
    Basis basis,
    std::span<const uint8_t> data_bits,
    const FinalVerdictFn& decoder) {
    if (final_frame.type != measured_type(basis)) {
        throw std::invalid_argument("final frame type does not match the measurement basis");
    }
    bool bit = raw_logical_parity(layout, basis, data_bits);
    bit ^= frame.sign(basis) < 0;
    if (decoder) bit ^= decoder(final_frame);
    return bit ? -1 : +1;
}

}  // namespace rtqec

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

#include <gtest/gtest.h>

#include <set>

#include "rtqec/feedback.h"
#include "rtqec/realtime_loop.h"

namespace rtqec {
namespace {

std::set<uint32_t> cancelled(const FeedbackPlan& plan, uint32_t round) {
    std::set<uint32_t> out;
    for (const auto& c : plan.cancellations) {
        EXPECT_EQ(c.round, round);
        out.insert(c.ancilla);
    }
    return out;
}

TEST(Feedback, verdicts_toggle_the_matching_sign) {
    PauliFrame f;
    EXPECT_TRUE(f.identity());
    f = apply_verdict(f, false, true);
    EXPECT_EQ(f.sign_z, -1);
    EXPECT_EQ(f.sign_x, 1);
    EXPECT_EQ(f.sign(Basis::Z), -1);
    EXPECT_EQ(f.sign(Basis::X), 1);
    f = apply_verdict(f, true, true);
    EXPECT_EQ(f, (PauliFrame{-1, 1}));
    f = apply_verdict(f, false, false);
    EXPECT_EQ(f, (PauliFrame{-1, 1}));
    f = apply_verdict(f, true, false);
    EXPECT_TRUE(f.identity());
}

TEST(Feedback, identity_frame_emits_nothing) {
    auto layout = build_layout(3);
    auto [plan, frame] = plan_feedback(PauliFrame{}, layout, 4);
    EXPECT_TRUE(plan.empty());
    EXPECT_TRUE(plan.cancellations.empty());
    EXPECT_TRUE(frame.identity());
    EXPECT_EQ(plan.to_json(), nlohmann::json::array());
}

TEST(Feedback, x_pulse_on_d1_cancels_a2) {
    auto layout = build_layout(3);
    auto [plan, frame] = plan_feedback(PauliFrame{1, -1}, layout, 5, 1234.0);
    ASSERT_EQ(plan.pulses.size(), 1u);
    EXPECT_EQ(plan.pulses[0], (FeedbackPulse{0, PauliAxis::X, 1234.0}));
    EXPECT_EQ(cancelled(plan, 5), (std::set<uint32_t>{1}));  // A2
    EXPECT_TRUE(frame.identity());
    auto j = plan.to_json();
    ASSERT_EQ(j.size(), 2u);
    EXPECT_EQ(j[0]["target"], "D1");
    EXPECT_EQ(j[0]["gate"], "X");
    EXPECT_EQ(j[1]["ancilla"], "A2");
    EXPECT_EQ(j[1]["round"], 5);
}

TEST(Feedback, z_pulse_on_d9_cancels_a8) {
    auto layout = build_layout(3);
    auto [plan, frame] = plan_feedback(PauliFrame{-1, 1}, layout, 2);
    ASSERT_EQ(plan.pulses.size(), 1u);
    EXPECT_EQ(plan.pulses[0].data, 8u);
    EXPECT_EQ(plan.pulses[0].gate, PauliAxis::Z);
    EXPECT_EQ(cancelled(plan, 2), (std::set<uint32_t>{7}));  // A8
    EXPECT_TRUE(frame.identity());
}

TEST(Feedback, both_signs_at_larger_distance) {
    for (int d : {5, 7}) {
        auto layout = build_layout(d);
        auto [plan, frame] = plan_feedback(PauliFrame{-1, -1}, layout, 3);
        ASSERT_EQ(plan.pulses.size(), 2u);
        EXPECT_EQ(plan.pulses[0].data, 0u);
        EXPECT_EQ(plan.pulses[1].data, static_cast<uint32_t>(d * d - 1));
        // Each corner qubit sits on one stabilizer of the detecting type.
        std::set<uint32_t> expect;
        for (auto a : layout.stabilizers_touching(0, StabilizerType::Z)) expect.insert(a);
        for (auto a : layout.stabilizers_touching(d * d - 1, StabilizerType::X)) expect.insert(a);
        EXPECT_EQ(expect.size(), 2u);
        EXPECT_EQ(cancelled(plan, 3), expect);
        EXPECT_TRUE(frame.identity());
        // The corners lie on the logical each pulse has to flip.
        const auto& zl = layout.logical_support(Basis::Z);
        const auto& xl = layout.logical_support(Basis::X);
        EXPECT_NE(std::find(zl.begin(), zl.end(), 0u), zl.end());
        EXPECT_NE(std::find(xl.begin(), xl.end(), uint32_t(d * d - 1)), xl.end());
    }
}

TEST(Feedback, final_pfu_examples) {
    auto layout = build_layout(3);
    std::vector<uint8_t> data(9, 0);
    FinalFrame ff{StabilizerType::Z, std::vector<uint8_t>(4, 0), std::vector<uint8_t>(4, 0)};
    EXPECT_EQ(final_pfu(PauliFrame{}, ff, layout, Basis::Z, data), +1);
    EXPECT_EQ(final_pfu(PauliFrame{1, -1}, ff, layout, Basis::Z, data), -1);
    // sign_x does not touch a Z-basis readout.
    EXPECT_EQ(final_pfu(PauliFrame{-1, 1}, ff, layout, Basis::Z, data), +1);
    data[1] = 1;  // D2 on the top row
    EXPECT_TRUE(raw_logical_parity(layout, Basis::Z, data));
    EXPECT_FALSE(raw_logical_parity(layout, Basis::X, data));
    EXPECT_EQ(final_pfu(PauliFrame{}, ff, layout, Basis::Z, data), -1);
    EXPECT_EQ(final_pfu(PauliFrame{1, -1}, ff, layout, Basis::Z, data), +1);
    EXPECT_EQ(final_pfu(PauliFrame{}, ff, layout, Basis::Z, data, [](const FinalFrame&) { return true; }), +1);

    FinalFrame fx{StabilizerType::X, std::vector<uint8_t>(4, 0), std::vector<uint8_t>(4, 0)};
    EXPECT_THROW(final_pfu(PauliFrame{}, fx, layout, Basis::Z, data), std::invalid_argument);
    EXPECT_EQ(final_pfu(PauliFrame{-1, 1}, fx, layout, Basis::X, std::vector<uint8_t>(9, 0)), -1);
    EXPECT_THROW(raw_logical_parity(layout, Basis::Z, std::vector<uint8_t>(8, 0)), std::invalid_argument);
}

struct LoopFixture {
    CodeLayout layout;
    LoopConfig config;
    std::shared_ptr<const MwpmGraphSet> gz, gx;

    LoopFixture(int d, Basis basis, uint32_t rounds, const std::vector<InjectionSpec>& inj = {})
        : layout(build_layout(d)) {
        config.distance = d;
        config.rounds = rounds;
        config.basis = basis;
        NoiseParams prior;
        gz = MwpmGraphSet::build(layout, basis, rounds, prior, StabilizerType::Z, inj);
        gx = MwpmGraphSet::build(layout, basis, rounds, prior, StabilizerType::X, inj);
    }

    ShotOutcome shot(FrameSimulator& sim, bool feasible = true) {
        MwpmStreamDecoder dz(gz), dx(gx);
        return run_shot(sim, config, config.rounds, dz, dx, feasible, true);
    }
};

TEST(Feedback, noiseless_loop_is_neutral) {
    for (Basis b : {Basis::Z, Basis::X}) {
        for (bool pfu : {false, true}) {
            for (uint32_t m : {0u, 1u, 2u}) {
                LoopFixture fx(3, b, 4);
                fx.config.final_pfu = pfu;
                fx.config.feedback_period = m;
                FrameSimulator sim(fx.layout, b, NoiseParams::noiseless(), {});
                for (uint64_t s = 0; s < 5; ++s) {
                    sim.begin_shot(s);
                    auto o = fx.shot(sim);
                    EXPECT_TRUE(o.success);
                    EXPECT_EQ(o.pulses_applied, 0u);
                    EXPECT_EQ(o.residual_defects, 0u);
                    EXPECT_TRUE(o.plans.empty());
                    EXPECT_TRUE(o.frame.identity());
                }
            }
        }
    }
}

TEST(Feedback, prepared_one_state_is_reported_as_success) {
    LoopFixture fx(3, Basis::Z, 3);
    fx.config.prepared_sign = -1;
    FrameSimulator sim(fx.layout, Basis::Z, NoiseParams::noiseless(), {});
    sim.begin_shot(9);
    auto o = fx.shot(sim);
    EXPECT_TRUE(o.raw_bit);
    EXPECT_TRUE(o.success);
}

// A deterministic X on D2 before round 2: the decoder flags sign_z, the loop
// sends X to D1, and the pair D1 D2 is a stabilizer of the code.
TEST(Feedback, injected_flip_is_undone_by_the_pulse) {
    const std::vector<InjectionSpec> inj = {InjectionSpec::parse("D2:X:180:round-2")};
    for (uint32_t m : {0u, 1u, 2u}) {
        LoopFixture fx(3, Basis::Z, 4, inj);
        fx.config.feedback_period = m;
        FrameSimulator sim(fx.layout, Basis::Z, NoiseParams::noiseless(), inj);
        sim.begin_shot(1);
        auto o = fx.shot(sim);
        EXPECT_TRUE(o.success) << "m=" << m;
        EXPECT_FALSE(o.raw_bit);
        EXPECT_EQ(o.pulses_applied, 1u);
        ASSERT_EQ(o.plans.size(), 1u);
        EXPECT_EQ(o.plans[0].pulses[0].data, 0u);
        EXPECT_EQ(o.plans[0].pulses[0].gate, PauliAxis::X);
        // Only the error's own defect remains; the pulse's is cancelled.
        EXPECT_EQ(o.residual_defects, 1u);
        EXPECT_TRUE(o.frame.identity());
    }
}

TEST(Feedback, pulses_match_pure_frame_tracking) {
    const std::vector<InjectionSpec> inj = {InjectionSpec::parse("D2:X:180:round-2"),
                                            InjectionSpec::parse("D3:Z:180:round-3")};
    LoopFixture fx(3, Basis::Z, 5, inj);
    FrameSimulator sim(fx.layout, Basis::Z, NoiseParams::noiseless(), inj);
    fx.config.feedback_period = 1;
    sim.begin_shot(0);
    auto fb = fx.shot(sim);
    fx.config.feedback = false;
    fx.config.final_pfu = true;
    sim.begin_shot(0);
    auto track = fx.shot(sim);
    EXPECT_TRUE(fb.success);
    EXPECT_TRUE(track.success);
    EXPECT_TRUE(track.raw_bit);
    EXPECT_EQ(track.frame, (PauliFrame{-1, -1}));
    EXPECT_EQ(fb.residual_defects, track.residual_defects);
    EXPECT_EQ(fb.pulses_applied, 2u);
}

TEST(Feedback, infeasible_delay_drops_pulses) {
    const std::vector<InjectionSpec> inj = {InjectionSpec::parse("D2:X:180:round-2")};
    LoopFixture fx(3, Basis::Z, 4, inj);
    fx.config.feedback_period = 1;
    FrameSimulator sim(fx.layout, Basis::Z, NoiseParams::noiseless(), inj);
    sim.begin_shot(0);
    auto o = fx.shot(sim, false);
    EXPECT_FALSE(o.success);
    EXPECT_EQ(o.pulses_applied, 0u);
    EXPECT_EQ(o.pulses_dropped, 3u);  // after rounds 2, 3 and 4
    EXPECT_EQ(o.frame.sign_z, -1);
    fx.config.final_pfu = true;
    sim.begin_shot(0);
    EXPECT_TRUE(fx.shot(sim, false).success);
}

}  // namespace
}  // namespace rtqec

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

#ifndef RTQEC_REALTIME_LOOP_H
#define RTQEC_REALTIME_LOOP_H

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "rtqec/code_model.h"
#include "rtqec/feedback.h"
#include "rtqec/mwpm.h"
#include "rtqec/noise_sim.h"
#include "rtqec/qlstm.h"

namespace rtqec {

/// Closed-loop latency from the end of the readout pulse to the start of the
/// feedback pulse, in ns.
struct LatencyBudget {
    uint32_t daq_sampling_ns = 222;
    uint32_t syndrome_ns = 20;
    uint32_t nn_core_ns = 124;
    uint32_t pfu_ns = 4;
    uint32_t adc_ns = 12;
    uint32_t demod_ns = 32;
    uint32_t classify_ns = 4;
    uint32_t comm_ns = 36;
    uint32_t backplane_ns = 8;
    uint32_t trigger_ns = 16;
    uint32_t wavegen_ns = 32;
    uint32_t dac_ns = 40;

    uint32_t decoder_subtotal() const {
        return syndrome_ns + nn_core_ns + pfu_ns;
    }
    uint32_t electronics_subtotal() const {
        return adc_ns + demod_ns + classify_ns + comm_ns + backplane_ns + trigger_ns + wavegen_ns + dac_ns;
    }
    uint32_t total() const {
        return daq_sampling_ns + decoder_subtotal() + electronics_subtotal();
    }

    nlohmann::json to_json() const;
    /// Missing keys keep their defaults; unknown keys are rejected.
    static LatencyBudget from_json(const nlohmann::json& j);
    bool operator==(const LatencyBudget&) const = default;
};

enum class DecoderKind : uint8_t { None = 0, Nn = 1, Mwpm = 2 };
const char* decoder_name(DecoderKind k);
DecoderKind parse_decoder(std::string_view text);

struct LoopConfig {
    int distance = 3;
    uint32_t rounds = 10;           // largest n evaluated
    std::vector<uint32_t> round_values;  // evaluated n; empty means 1..rounds
    uint32_t feedback_period = 0;   // m; 0 = final-round feedback only
    bool feedback = true;           // false: pure frame tracking, no pulses
    uint32_t delay_ns = 550;
    uint32_t qec_cycle_ns = 1250;
    DecoderKind decoder = DecoderKind::Mwpm;
    bool final_pfu = false;
    Basis basis = Basis::Z;
    int prepared_sign = +1;         // +1: |0> or |+>, -1: |1> or |->
    std::string weights_x;          // NN weight files per stabilizer type
    std::string weights_z;
    std::optional<NoiseParams> decoder_prior;  // MWPM edge weights; defaults to the simulation noise
    LatencyBudget budget;

    /// n values in evaluation order.
    std::vector<uint32_t> evaluated_rounds() const;
    /// Throws std::invalid_argument with an actionable message.
    void validate() const;

    nlohmann::json to_json() const;
    static LoopConfig from_json(const nlohmann::json& j);
    bool operator==(const LoopConfig&) const = default;
};

/// Logical state label ("0", "1", "+", "-") of a basis and sign.
std::string state_label(Basis basis, int sign);
/// Inverse of state_label.
std::pair<Basis, int> parse_state(std::string_view label);

struct RoundTiming {
    uint32_t round;
    bool feedback;          // a feedback window follows this round
    bool feasible;          // the window is reached in time
    double measure_end_ns;  // end of this round's readout
    double feedback_ns;     // scheduled feedback start
};

struct FeasibilityReport {
    bool feasible = true;
    int64_t slack_ns = 0;  // delay - budget total
    uint32_t required_ns = 0;
    std::vector<RoundTiming> rounds;

    nlohmann::json to_json() const;
};

/// Feedback after round n is feasible iff delay_ns >= budget.total(). The
/// delay follows every readout, so round n ends at n*cycle + (n-1)*delay.
FeasibilityReport check_feasibility(const LoopConfig& config, const LatencyBudget& budget);

struct DecoderTiming {
    uint32_t latency_ns = kQlstmLatencyCycles * 4;
    uint32_t throughput_ns = kQlstmThroughputCycles * 4;
};

struct BacklogReport {
    bool zero_backlog = true;
    int64_t slack_ns = 0;              // cycle - throughput period
    uint64_t backlog_per_round_ns = 0;
    uint64_t final_backlog_ns = 0;     // queueing delay of the last input
    uint64_t worst_latency_ns = 0;     // arrival to verdict
    std::vector<uint64_t> queue_ns;    // per round

    nlohmann::json to_json() const;
};

BacklogReport check_throughput(const LoopConfig& config, const DecoderTiming& timing = {});

struct DecayPoint {
    uint32_t n;
    double f;      // logical fidelity, (1 - 2 eps)^n in the model
    double sigma;  // standard error of f; <= 0 when unknown
};

struct DecayFit {
    bool valid = false;
    double epsilon = 0.0;
    double epsilon_err = 0.0;
    double slope = 0.0;  // ln(1 - 2 eps)
    double slope_err = 0.0;
    bool weighted = false;
    double chi2 = 0.0;
    double scale_factor = 1.0;  // max(1, sqrt(chi2 / dof)) applied to the errors
    std::vector<uint32_t> used;
    std::vector<uint32_t> excluded;  // f <= 0, log undefined
    std::vector<double> residuals;   // ln f - slope * n for used points
    std::string warning;

    nlohmann::json to_json() const;
};

/// Least squares of ln f against n through the origin. With every sigma
/// positive the fit is weighted by (f / sigma)^2 and the error follows from
/// the known variances, inflated by sqrt(chi2 / dof) when the scatter exceeds
/// them; otherwise it is unweighted with the error estimated from the
/// residuals. Throws std::invalid_argument for fewer than three
/// points or f > 1.
DecayFit fit_decay(std::span<const DecayPoint> points);

/// Logical fidelity 2P - 1 from a success probability.
inline double fidelity_from_success(double p) {
    return 2.0 * p - 1.0;
}

/// Decoder fed one stabilizer type's defects round by round; reports its
/// running estimate of whether the tracked logical has flipped.
class StreamDecoder {
   public:
    virtual ~StreamDecoder() = default;
    virtual void reset() = 0;
    virtual bool push(std::span<const uint8_t> defects) = 0;
    /// Folds in the final-measurement defects (measured type only).
    virtual bool finish(std::span<const uint8_t> final_defects) = 0;
};

class NullDecoder final : public StreamDecoder {
   public:
    void reset() override {
    }
    bool push(std::span<const uint8_t>) override {
        return false;
    }
    bool finish(std::span<const uint8_t>) override {
        return false;
    }
};

class NnStreamDecoder final : public StreamDecoder {
   public:
    explicit NnStreamDecoder(QLstmWeights weights);
    void reset() override;
    bool push(std::span<const uint8_t> defects) override;
    bool finish(std::span<const uint8_t> final_defects) override;

   private:
    QLstmDecoder decoder_;
};

/// Detector graphs for decoding after every round of an n-round experiment.
struct MwpmGraphSet {
    StabilizerType type = StabilizerType::Z;
    std::vector<DetectorGraph> truncated;  // [r-1] covers rounds 1..r
    std::optional<DetectorGraph> full;     // with the final layer

    static std::shared_ptr<const MwpmGraphSet> build(
        const CodeLayout& layout,
        Basis basis,
        uint32_t rounds,
        const NoiseParams& prior,
        StabilizerType type,
        const std::vector<InjectionSpec>& injections);
};

class MwpmStreamDecoder final : public StreamDecoder {
   public:
    explicit MwpmStreamDecoder(std::shared_ptr<const MwpmGraphSet> graphs);
    void reset() override;
    bool push(std::span<const uint8_t> defects) override;
    bool finish(std::span<const uint8_t> final_defects) override;

    uint64_t ambiguous() const {
        return ambiguous_;
    }

   private:
    std::shared_ptr<const MwpmGraphSet> graphs_;
    std::vector<uint32_t> nodes_;
    uint32_t round_ = 0;
    uint64_t ambiguous_ = 0;
};

struct RoundPoint {
    uint32_t n = 0;
    uint64_t shots = 0;
    uint64_t successes = 0;
    uint64_t pulses_applied = 0;
    uint64_t pulses_dropped = 0;

    double success_probability() const;
    double fidelity() const;  // 2P - 1
    double fidelity_err() const;
};

struct ExperimentResult {
    LoopConfig config;
    NoiseParams noise;
    std::vector<InjectionSpec> injections;
    uint64_t shots = 0;
    uint64_t seed = 0;
    std::vector<RoundPoint> points;
    DecayFit fit;
    FeasibilityReport feasibility;
    BacklogReport backlog;

    /// Columns n,F,err,P,shots,successes.
    std::string csv() const;
    nlohmann::json to_json() const;
};

/// Runs one independent memory experiment per evaluated n. Shot k of the
/// n-round experiment draws its randomness from derive_seed(derive_seed(seed,
/// n), k), so results do not depend on `workers`.
ExperimentResult run(
    const LoopConfig& config,
    const NoiseParams& noise,
    const std::vector<InjectionSpec>& injections,
    uint64_t shots,
    uint64_t seed,
    unsigned workers = 1);

struct ShotOutcome {
    bool success = false;
    bool corrected_bit = false;
    bool raw_bit = false;
    uint32_t pulses_applied = 0;
    uint32_t pulses_dropped = 0;
    uint32_t residual_defects = 0;  // defects left after cancellation
    PauliFrame frame;
    std::vector<FeedbackPlan> plans;
};

/// One shot of the closed loop. The caller starts the shot on `sim`
/// (begin_shot or begin_probe); decoders are reset here. With `keep_plans`
/// every emitted plan is returned.
ShotOutcome run_shot(
    FrameSimulator& sim,
    const LoopConfig& config,
    uint32_t rounds,
    StreamDecoder& decoder_z,
    StreamDecoder& decoder_x,
    bool feasible,
    bool keep_plans = false);

/// Decodes recorded shots of one n-round experiment offline. Pulses cannot
/// act on recorded data, so the decoder's estimate is applied at readout
/// (pure frame tracking with the final update). Every record must match the
/// config's distance and basis and share one round count; the prepared state
/// is the +1 eigenstate. MWPM weights come from `prior`.
RoundPoint replay_shots(
    const LoopConfig& config,
    const NoiseParams& prior,
    const std::vector<InjectionSpec>& injections,
    std::span<const ShotRecord> shots,
    unsigned workers = 1);

}  // namespace rtqec

#endif

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

#ifndef RTQEC_QLSTM_H
#define RTQEC_QLSTM_H

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rtqec/code_model.h"

namespace rtqec {

// Fixed-point conventions
//
//   weights      signed 6-bit integers, value = w / 2^frac_bits
//   activations  unsigned, 8 fractional bits: i, f, o, c~, h in [0, 256]
//                (256 is exactly 1.0), cell state c in [0, 511]
//   accumulator  signed 24-bit, units of 2^-(frac_bits + 8), saturating
//   rounding     half away from zero on every right shift
//
// Gates: i, f, o use the hard sigmoid clip(0.5 v + 0.5, 0, 1); the candidate
// c~ uses the clipped ReLU clip(v, 0, 1). Then
//   c_n = f * c_{n-1} + i * c~     (saturated to 511/256)
//   h_n = o * min(c_n, 1)
//   y_n = sigmoid(W_d h_n + b_d)

inline constexpr int kWeightMin = -32;
inline constexpr int kWeightMax = 31;
inline constexpr int kActivationFracBits = 8;
inline constexpr int32_t kActivationOne = 1 << kActivationFracBits;
inline constexpr int32_t kCellMax = 2 * kActivationOne - 1;
inline constexpr int64_t kAccumulatorMax = (int64_t{1} << 23) - 1;
inline constexpr int64_t kAccumulatorMin = -(int64_t{1} << 23);

inline constexpr uint32_t kQlstmLatencyCycles = 31;
inline constexpr uint32_t kQlstmThroughputCycles = 46;
inline constexpr uint32_t kPfuCycles = 1;

inline constexpr char kWeightMagic[7] = "QECNW1";
inline constexpr uint8_t kWeightVersion = 1;

enum Gate : int { kGateI = 0, kGateF = 1, kGateC = 2, kGateO = 3 };

struct QLstmWeights {
    uint8_t version = kWeightVersion;
    uint8_t frac_bits = 4;
    uint16_t input_size = 0;
    uint16_t hidden_size = 0;
    StabilizerType type = StabilizerType::Z;

    std::array<std::vector<int8_t>, 4> wx;  // hidden x input, row-major
    std::array<std::vector<int8_t>, 4> wh;  // hidden x hidden
    std::array<std::vector<int8_t>, 4> b;   // hidden
    std::vector<int8_t> wd;                 // hidden
    int8_t bd = 0;

    static QLstmWeights zeros(uint16_t input_size, uint16_t hidden_size, StabilizerType type, uint8_t frac_bits = 4);
    /// Uniform integers in [-32, 31].
    static QLstmWeights random(uint16_t input_size, uint16_t hidden_size, StabilizerType type, std::mt19937_64& rng);

    /// 4 (dim(x) h + h^2 + h).
    size_t lstm_parameter_count() const;
    /// h + 1.
    size_t dense_parameter_count() const;

    /// Throws std::invalid_argument on range or shape violations.
    void validate() const;

    bool operator==(const QLstmWeights&) const = default;
};

/// Serialization to the weight file layout:
///   magic "QECNW1", u8 version, u8 frac_bits, u16 input_size,
///   u16 hidden_size, u8 type ('X' or 'Z'), then signed bytes
///   W_x^{i,f,c,o}, W_h^{i,f,c,o}, b^{i,f,c,o}, W_d, b_d.
std::vector<uint8_t> encode_weights(const QLstmWeights& w);
QLstmWeights decode_weights(std::span<const uint8_t> bytes);
void save_weights(const QLstmWeights& w, const std::string& path);
QLstmWeights load_weights(const std::string& path);

/// Double-precision copy of a weight set.
struct FloatWeights {
    uint16_t input_size = 0;
    uint16_t hidden_size = 0;
    std::array<std::vector<double>, 4> wx;
    std::array<std::vector<double>, 4> wh;
    std::array<std::vector<double>, 4> b;
    std::vector<double> wd;
    double bd = 0.0;
};

FloatWeights dequantize(const QLstmWeights& w);

struct DecoderState {
    std::vector<int32_t> h;  // units of 2^-8
    std::vector<int32_t> c;
    uint32_t round = 0;

    static DecoderState zeros(uint16_t hidden_size);
    bool operator==(const DecoderState&) const = default;
};

struct FloatState {
    std::vector<double> h;
    std::vector<double> c;
    uint32_t round = 0;

    static FloatState zeros(uint16_t hidden_size);
};

struct DecodeVerdict {
    int32_t y = 0;                // output in units of 2^-8
    int64_t preactivation = 0;    // dense accumulator, units of 2^-(frac_bits+8)
    bool flip = false;            // preactivation > 0, i.e. the real-valued y > 0.5
    uint32_t latency_cycles = kQlstmLatencyCycles;
    uint32_t throughput_cycles = kQlstmThroughputCycles;

    double y_value() const {
        return static_cast<double>(y) / kActivationOne;
    }
};

struct FloatVerdict {
    double y = 0.5;
    double preactivation = 0.0;
    bool flip = false;
};

/// Gate values of the last step, for inspection.
struct StepTrace {
    std::array<std::vector<int32_t>, 4> gates;
};

int64_t round_shift(int64_t value, int shift);
int32_t hard_sigmoid_fixed(int64_t acc, int frac_bits);
int32_t clipped_relu_fixed(int64_t acc, int frac_bits);

/// One fixed-point step. Throws std::invalid_argument if x has the wrong width.
std::pair<DecoderState, DecodeVerdict> step(
    const DecoderState& state, std::span<const uint8_t> x, const QLstmWeights& w, StepTrace* trace = nullptr);

/// The same recurrence in double precision.
std::pair<FloatState, FloatVerdict> step_float(const FloatState& state, std::span<const uint8_t> x, const FloatWeights& w);

DecoderState reset(const DecoderState& state);
FloatState reset(const FloatState& state);

/// Stateful wrapper holding one decoder's weights and state.
class QLstmDecoder {
   public:
    explicit QLstmDecoder(QLstmWeights weights);

    DecodeVerdict push(std::span<const uint8_t> x);
    void reset();

    const DecoderState& state() const {
        return state_;
    }
    const QLstmWeights& weights() const {
        return weights_;
    }

   private:
    QLstmWeights weights_;
    DecoderState state_;
};

/// Timing of one decoder input through the modeled pipeline.
struct PipelineEvent {
    uint64_t arrival_cycle;
    uint64_t start_cycle;
    uint64_t done_cycle;

    uint64_t queue_cycles() const {
        return start_cycle - arrival_cycle;
    }
    uint64_t latency_cycles() const {
        return done_cycle - arrival_cycle;
    }
};

/// A new input is accepted at most every `throughput` cycles and finishes
/// `latency` cycles after it starts.
class PipelineModel {
   public:
    PipelineModel(uint32_t latency = kQlstmLatencyCycles, uint32_t throughput = kQlstmThroughputCycles);

    PipelineEvent submit(uint64_t arrival_cycle);
    /// Feeds `rounds` inputs spaced `gap` cycles apart.
    std::vector<PipelineEvent> run(uint32_t rounds, uint64_t gap);

   private:
    uint32_t latency_;
    uint32_t throughput_;
    bool has_last_ = false;
    uint64_t last_start_ = 0;
};

}  // namespace rtqec

#endif

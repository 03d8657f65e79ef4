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

#include "rtqec/qlstm.h"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace rtqec {

namespace {

constexpr size_t kHeaderSize = 6 + 1 + 1 + 2 + 2 + 1;

size_t payload_size(size_t in, size_t h) {
    return 4 * h * in + 4 * h * h + 4 * h + h + 1;
}

void check_input(std::span<const uint8_t> x, size_t input_size) {
    if (x.size() != input_size) {
        throw std::invalid_argument("decoder input has " + std::to_string(x.size()) + " entries, expected " + std::to_string(input_size));
    }
}

int64_t saturate_acc(int64_t v) {
    return std::clamp(v, kAccumulatorMin, kAccumulatorMax);
}

}  // namespace

QLstmWeights QLstmWeights::zeros(uint16_t input_size, uint16_t hidden_size, StabilizerType type, uint8_t frac_bits) {
    QLstmWeights w;
    w.frac_bits = frac_bits;
    w.input_size = input_size;
    w.hidden_size = hidden_size;
    w.type = type;
    for (int g = 0; g < 4; ++g) {
        w.wx[g].assign(static_cast<size_t>(hidden_size) * input_size, 0);
        w.wh[g].assign(static_cast<size_t>(hidden_size) * hidden_size, 0);
        w.b[g].assign(hidden_size, 0);
    }
    w.wd.assign(hidden_size, 0);
    return w;
}

QLstmWeights QLstmWeights::random(uint16_t input_size, uint16_t hidden_size, StabilizerType type, std::mt19937_64& rng) {
    QLstmWeights w = zeros(input_size, hidden_size, type);
    std::uniform_int_distribution<int> dist(kWeightMin, kWeightMax);
    auto fill = [&](std::vector<int8_t>& v) {
        for (auto& e : v) e = static_cast<int8_t>(dist(rng));
    };
    for (int g = 0; g < 4; ++g) {
        fill(w.wx[g]);
        fill(w.wh[g]);
        fill(w.b[g]);
    }
    fill(w.wd);
    w.bd = static_cast<int8_t>(dist(rng));
    return w;
}

size_t QLstmWeights::lstm_parameter_count() const {
    const size_t h = hidden_size;
    return 4 * (static_cast<size_t>(input_size) * h + h * h + h);
}

size_t QLstmWeights::dense_parameter_count() const {
    return static_cast<size_t>(hidden_size) + 1;
}

void QLstmWeights::validate() const {
    if (version != kWeightVersion) {
        throw std::invalid_argument("unsupported weight version " + std::to_string(version));
    }
    if (frac_bits > 12) {
        throw std::invalid_argument("frac_bits " + std::to_string(frac_bits) + " out of range [0, 12]");
    }
    if (input_size == 0 || hidden_size == 0) {
        throw std::invalid_argument("weight shapes must be non-empty");
    }
    const size_t h = hidden_size, in = input_size;
    auto check = [&](const std::vector<int8_t>& v, size_t n, const char* name) {
        if (v.size() != n) {
            throw std::invalid_argument(std::string("shape mismatch in ") + name);
        }
        for (int8_t e : v) {
            if (e < kWeightMin || e > kWeightMax) {
                throw std::invalid_argument(std::string("weight ") + std::to_string(e) + " in " + name + " outside [-32, 31]");
            }
        }
    };
    static const char* names[4] = {"i", "f", "c", "o"};
    for (int g = 0; g < 4; ++g) {
        check(wx[g], h * in, (std::string("W_x^") + names[g]).c_str());
        check(wh[g], h * h, (std::string("W_h^") + names[g]).c_str());
        check(b[g], h, (std::string("b^") + names[g]).c_str());
    }
    check(wd, h, "W_d");
    if (bd < kWeightMin || bd > kWeightMax) {
        throw std::invalid_argument("dense bias " + std::to_string(bd) + " outside [-32, 31]");
    }
}

std::vector<uint8_t> encode_weights(const QLstmWeights& w) {
    w.validate();
    std::vector<uint8_t> out(kWeightMagic, kWeightMagic + 6);
    out.push_back(w.version);
    out.push_back(w.frac_bits);
    out.push_back(static_cast<uint8_t>(w.input_size & 0xFF));
    out.push_back(static_cast<uint8_t>(w.input_size >> 8));
    out.push_back(static_cast<uint8_t>(w.hidden_size & 0xFF));
    out.push_back(static_cast<uint8_t>(w.hidden_size >> 8));
    out.push_back(static_cast<uint8_t>(type_char(w.type)));
    auto put = [&](const std::vector<int8_t>& v) {
        for (int8_t e : v) out.push_back(static_cast<uint8_t>(e));
    };
    for (int g = 0; g < 4; ++g) put(w.wx[g]);
    for (int g = 0; g < 4; ++g) put(w.wh[g]);
    for (int g = 0; g < 4; ++g) put(w.b[g]);
    put(w.wd);
    out.push_back(static_cast<uint8_t>(w.bd));
    return out;
}

QLstmWeights decode_weights(std::span<const uint8_t> bytes) {
    if (bytes.size() < kHeaderSize || std::memcmp(bytes.data(), kWeightMagic, 6) != 0) {
        throw std::invalid_argument("not a QECNW1 weight file (bad magic)");
    }
    QLstmWeights w;
    w.version = bytes[6];
    if (w.version != kWeightVersion) {
        throw std::invalid_argument("unsupported weight version " + std::to_string(w.version));
    }
    w.frac_bits = bytes[7];
    w.input_size = static_cast<uint16_t>(bytes[8] | (bytes[9] << 8));
    w.hidden_size = static_cast<uint16_t>(bytes[10] | (bytes[11] << 8));
    const char tag = static_cast<char>(bytes[12]);
    if (tag == 'X') {
        w.type = StabilizerType::X;
    } else if (tag == 'Z') {
        w.type = StabilizerType::Z;
    } else {
        throw std::invalid_argument(std::string("bad decoder type tag '") + tag + "'");
    }
    const size_t h = w.hidden_size, in = w.input_size;
    if (bytes.size() != kHeaderSize + payload_size(in, h)) {
        throw std::invalid_argument("shape mismatch: payload is " + std::to_string(bytes.size() - kHeaderSize) +
                                    " bytes, header implies " + std::to_string(payload_size(in, h)));
    }
    size_t pos = kHeaderSize;
    auto take = [&](std::vector<int8_t>& v, size_t n) {
        v.resize(n);
        for (size_t k = 0; k < n; ++k) v[k] = static_cast<int8_t>(bytes[pos++]);
    };
    for (int g = 0; g < 4; ++g) take(w.wx[g], h * in);
    for (int g = 0; g < 4; ++g) take(w.wh[g], h * h);
    for (int g = 0; g < 4; ++g) take(w.b[g], h);
    take(w.wd, h);
    w.bd = static_cast<int8_t>(bytes[pos++]);
    w.validate();
    return w;
}

void save_weights(const QLstmWeights& w, const std::string& path) {
    const auto bytes = encode_weights(w);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw std::runtime_error("write failed on '" + path + "'");
    }
}

QLstmWeights load_weights(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open weight file '" + path + "'");
    }
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_weights(bytes);
}

FloatWeights dequantize(const QLstmWeights& w) {
    FloatWeights f;
    f.input_size = w.input_size;
    f.hidden_size = w.hidden_size;
    const double scale = 1.0 / static_cast<double>(1 << w.frac_bits);
    auto conv = [&](const std::vector<int8_t>& v) {
        std::vector<double> out(v.size());
        for (size_t k = 0; k < v.size(); ++k) out[k] = v[k] * scale;
        return out;
    };
    for (int g = 0; g < 4; ++g) {
        f.wx[g] = conv(w.wx[g]);
        f.wh[g] = conv(w.wh[g]);
        f.b[g] = conv(w.b[g]);
    }
    f.wd = conv(w.wd);
    f.bd = w.bd * scale;
    return f;
}

DecoderState DecoderState::zeros(uint16_t hidden_size) {
    return DecoderState{std::vector<int32_t>(hidden_size, 0), std::vector<int32_t>(hidden_size, 0), 0};
}

FloatState FloatState::zeros(uint16_t hidden_size) {
    return FloatState{std::vector<double>(hidden_size, 0.0), std::vector<double>(hidden_size, 0.0), 0};
}

int64_t round_shift(int64_t value, int shift) {
    if (shift <= 0) {
        return value;
    }
    const int64_t half = int64_t{1} << (shift - 1);
    if (value >= 0) {
        return (value + half) >> shift;
    }
    return -((-value + half) >> shift);
}

int32_t hard_sigmoid_fixed(int64_t acc, int frac_bits) {
    // 0.5 v in units of 2^-8 is acc / 2^(frac_bits + 1).
    const int64_t v = round_shift(acc, frac_bits + 1) + kActivationOne / 2;
    return static_cast<int32_t>(std::clamp<int64_t>(v, 0, kActivationOne));
}

int32_t clipped_relu_fixed(int64_t acc, int frac_bits) {
    const int64_t v = round_shift(acc, frac_bits);
    return static_cast<int32_t>(std::clamp<int64_t>(v, 0, kActivationOne));
}

std::pair<DecoderState, DecodeVerdict> step(
    const DecoderState& state, std::span<const uint8_t> x, const QLstmWeights& w, StepTrace* trace) {
    check_input(x, w.input_size);
    const size_t h = w.hidden_size, in = w.input_size;
    if (state.h.size() != h || state.c.size() != h) {
        throw std::invalid_argument("decoder state does not match hidden size");
    }
    std::array<std::vector<int32_t>, 4> gates;
    for (int g = 0; g < 4; ++g) {
        gates[g].resize(h);
        for (size_t j = 0; j < h; ++j) {
            int64_t acc = static_cast<int64_t>(w.b[g][j]) * kActivationOne;
            const int8_t* rx = &w.wx[g][j * in];
            for (size_t k = 0; k < in; ++k) {
                if (x[k] & 1) acc += static_cast<int64_t>(rx[k]) * kActivationOne;
            }
            const int8_t* rh = &w.wh[g][j * h];
            for (size_t k = 0; k < h; ++k) {
                acc += static_cast<int64_t>(rh[k]) * state.h[k];
            }
            acc = saturate_acc(acc);
            gates[g][j] = g == kGateC ? clipped_relu_fixed(acc, w.frac_bits) : hard_sigmoid_fixed(acc, w.frac_bits);
        }
    }
    DecoderState next;
    next.round = state.round + 1;
    next.h.resize(h);
    next.c.resize(h);
    for (size_t j = 0; j < h; ++j) {
        const int64_t prod = static_cast<int64_t>(gates[kGateF][j]) * state.c[j] +
                             static_cast<int64_t>(gates[kGateI][j]) * gates[kGateC][j];
        next.c[j] = static_cast<int32_t>(std::clamp<int64_t>(round_shift(prod, kActivationFracBits), 0, kCellMax));
        const int64_t relu_c = std::min<int64_t>(next.c[j], kActivationOne);
        next.h[j] = static_cast<int32_t>(round_shift(gates[kGateO][j] * relu_c, kActivationFracBits));
    }
    DecodeVerdict v;
    int64_t acc = static_cast<int64_t>(w.bd) * kActivationOne;
    for (size_t k = 0; k < h; ++k) {
        acc += static_cast<int64_t>(w.wd[k]) * next.h[k];
    }
    acc = saturate_acc(acc);
    v.preactivation = acc;
    v.y = hard_sigmoid_fixed(acc, w.frac_bits);
    v.flip = acc > 0;
    if (trace) {
        trace->gates = std::move(gates);
    }
    return {std::move(next), v};
}

std::pair<FloatState, FloatVerdict> step_float(const FloatState& state, std::span<const uint8_t> x, const FloatWeights& w) {
    check_input(x, w.input_size);
    const size_t h = w.hidden_size, in = w.input_size;
    if (state.h.size() != h || state.c.size() != h) {
        throw std::invalid_argument("decoder state does not match hidden size");
    }
    auto sigmoid = [](double v) { return std::clamp(0.5 * v + 0.5, 0.0, 1.0); };
    auto relu = [](double v) { return std::clamp(v, 0.0, 1.0); };
    std::array<std::vector<double>, 4> gates;
    for (int g = 0; g < 4; ++g) {
        gates[g].resize(h);
        for (size_t j = 0; j < h; ++j) {
            double acc = w.b[g][j];
            for (size_t k = 0; k < in; ++k) {
                if (x[k] & 1) acc += w.wx[g][j * in + k];
            }
            for (size_t k = 0; k < h; ++k) {
                acc += w.wh[g][j * h + k] * state.h[k];
            }
            gates[g][j] = g == kGateC ? relu(acc) : sigmoid(acc);
        }
    }
    FloatState next;
    next.round = state.round + 1;
    next.h.resize(h);
    next.c.resize(h);
    const double c_max = static_cast<double>(kCellMax) / kActivationOne;
    for (size_t j = 0; j < h; ++j) {
        next.c[j] = std::clamp(gates[kGateF][j] * state.c[j] + gates[kGateI][j] * gates[kGateC][j], 0.0, c_max);
        next.h[j] = gates[kGateO][j] * std::min(next.c[j], 1.0);
    }
    FloatVerdict v;
    double acc = w.bd;
    for (size_t k = 0; k < h; ++k) {
        acc += w.wd[k] * next.h[k];
    }
    v.preactivation = acc;
    v.y = sigmoid(acc);
    v.flip = acc > 0;
    return {std::move(next), v};
}

DecoderState reset(const DecoderState& state) {
    return DecoderState::zeros(static_cast<uint16_t>(state.h.size()));
}

FloatState reset(const FloatState& state) {
    return FloatState::zeros(static_cast<uint16_t>(state.h.size()));
}

QLstmDecoder::QLstmDecoder(QLstmWeights weights) : weights_(std::move(weights)) {
    weights_.validate();
    state_ = DecoderState::zeros(weights_.hidden_size);
}

DecodeVerdict QLstmDecoder::push(std::span<const uint8_t> x) {
    auto [next, verdict] = step(state_, x, weights_);
    state_ = std::move(next);
    return verdict;
}

void QLstmDecoder::reset() {
    state_ = DecoderState::zeros(weights_.hidden_size);
}

PipelineModel::PipelineModel(uint32_t latency, uint32_t throughput) : latency_(latency), throughput_(throughput) {
}

PipelineEvent PipelineModel::submit(uint64_t arrival_cycle) {
    uint64_t start = arrival_cycle;
    if (has_last_) {
        start = std::max(start, last_start_ + throughput_);
    }
    has_last_ = true;
    last_start_ = start;
    return PipelineEvent{arrival_cycle, start, start + latency_};
}

std::vector<PipelineEvent> PipelineModel::run(uint32_t rounds, uint64_t gap) {
    std::vector<PipelineEvent> out;
    out.reserve(rounds);
    for (uint32_t r = 0; r < rounds; ++r) {
        out.push_back(submit(static_cast<uint64_t>(r) * gap));
    }
    return out;
}

}  // namespace rtqec

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

#include "rtqec/noise_sim.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace rtqec {

namespace {

bool valid_probability(double p) {
    return p >= 0.0 && p <= 0.5;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> out;
    size_t start = 0;
    while (true) {
        size_t pos = text.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(text.substr(start));
            return out;
        }
        out.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
}

}  // namespace

NoiseParams NoiseParams::noiseless() {
    return NoiseParams{0.0, 0.0, 0.0, 0.0, true};
}

bool NoiseParams::is_noiseless() const {
    return p1 == 0 && p2 == 0 && p_idle == 0 && p_meas == 0;
}

void NoiseParams::validate() const {
    if (!valid_probability(p1) || !valid_probability(p2) || !valid_probability(p_idle) ||
        !valid_probability(p_meas)) {
        throw std::invalid_argument("noise probabilities must lie in [0, 0.5]");
    }
    if (!no_reset) {
        throw std::invalid_argument("only the no-reset circuit is supported (no_reset must be true)");
    }
}

nlohmann::json NoiseParams::to_json() const {
    return {{"p1", p1}, {"p2", p2}, {"p_idle", p_idle}, {"p_meas", p_meas}, {"no_reset", no_reset}};
}

NoiseParams NoiseParams::from_json(const nlohmann::json& j) {
    NoiseParams n;
    n.p1 = j.value("p1", n.p1);
    n.p2 = j.value("p2", n.p2);
    n.p_idle = j.value("p_idle", n.p_idle);
    n.p_meas = j.value("p_meas", n.p_meas);
    n.no_reset = j.value("no_reset", true);
    n.validate();
    return n;
}

double InjectionSpec::flip_probability() const {
    const double half = theta_deg * std::numbers::pi / 360.0;
    const double s = std::sin(half);
    return s * s;
}

bool InjectionSpec::applies_to(uint32_t round_index) const {
    return schedule == InjectionSchedule::EachRound || round_index == round;
}

void InjectionSpec::validate(const CodeLayout& layout) const {
    if (target_is_ancilla) {
        throw std::invalid_argument("injection target " + CodeLayout::ancilla_label(target) + " is an ancilla; only data qubits may be targeted");
    }
    if (target >= layout.num_data()) {
        throw std::invalid_argument("injection target " + CodeLayout::data_label(target) + " is outside the layout");
    }
    if (!(theta_deg >= 0.0 && theta_deg <= 180.0)) {
        throw std::invalid_argument("injection angle must lie in [0, 180] degrees");
    }
    if (schedule == InjectionSchedule::BeforeRound && round == 0) {
        throw std::invalid_argument("injection round is 1-based");
    }
}

InjectionSpec InjectionSpec::parse(std::string_view text) {
    auto parts = split(text, ':');
    if (parts.size() < 3 || parts.size() > 4) {
        throw std::invalid_argument("bad injection '" + std::string(text) + "' (expected QUBIT:AXIS:ANGLE[deg][:SCHEDULE])");
    }
    InjectionSpec spec;
    auto [is_ancilla, index] = CodeLayout::parse_label(parts[0]);
    spec.target_is_ancilla = is_ancilla;
    spec.target = index;
    spec.axis = parse_axis(parts[1]);
    std::string_view angle = parts[2];
    if (angle.size() > 3 && angle.substr(angle.size() - 3) == "deg") {
        angle.remove_suffix(3);
    }
    std::string angle_str(angle);
    size_t used = 0;
    try {
        spec.theta_deg = std::stod(angle_str, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != angle_str.size()) {
        throw std::invalid_argument("bad injection angle '" + std::string(parts[2]) + "'");
    }
    if (parts.size() == 4) {
        std::string_view sched = parts[3];
        if (sched == "each-round") {
            spec.schedule = InjectionSchedule::EachRound;
        } else if (sched.starts_with("round-")) {
            spec.schedule = InjectionSchedule::BeforeRound;
            auto num = sched.substr(6);
            auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), spec.round);
            if (ec != std::errc() || ptr != num.data() + num.size() || spec.round == 0) {
                throw std::invalid_argument("bad injection schedule '" + std::string(sched) + "'");
            }
        } else {
            throw std::invalid_argument("bad injection schedule '" + std::string(sched) + "' (expected each-round or round-K)");
        }
    }
    return spec;
}

std::string InjectionSpec::to_string() const {
    std::string out = target_is_ancilla ? CodeLayout::ancilla_label(target) : CodeLayout::data_label(target);
    out += ':';
    out += axis_char(axis);
    out += ':';
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", theta_deg);
    out += buf;
    out += "deg:";
    out += schedule == InjectionSchedule::EachRound ? std::string("each-round") : "round-" + std::to_string(round);
    return out;
}

nlohmann::json InjectionSpec::to_json() const {
    return {
        {"target", target_is_ancilla ? CodeLayout::ancilla_label(target) : CodeLayout::data_label(target)},
        {"axis", std::string(1, axis_char(axis))},
        {"theta_deg", theta_deg},
        {"schedule", schedule == InjectionSchedule::EachRound ? "each-round" : "before-round"},
        {"round", round},
    };
}

InjectionSpec InjectionSpec::from_json(const nlohmann::json& j) {
    InjectionSpec spec;
    auto [is_ancilla, index] = CodeLayout::parse_label(j.at("target").get<std::string>());
    spec.target_is_ancilla = is_ancilla;
    spec.target = index;
    spec.axis = parse_axis(j.at("axis").get<std::string>());
    spec.theta_deg = j.at("theta_deg").get<double>();
    const auto sched = j.value("schedule", std::string("each-round"));
    if (sched == "each-round") {
        spec.schedule = InjectionSchedule::EachRound;
    } else if (sched == "before-round") {
        spec.schedule = InjectionSchedule::BeforeRound;
    } else {
        throw std::invalid_argument("unknown injection schedule '" + sched + "'");
    }
    spec.round = j.value("round", 1u);
    return spec;
}

uint64_t mix_seed(uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

uint64_t derive_seed(uint64_t base, uint64_t index) {
    return mix_seed(mix_seed(base) ^ (index * 0xD1B54A32D192ED03ull + 0x8CB92BA72F3D8DD7ull));
}

uint32_t component_count(FaultKind kind) {
    switch (kind) {
        case FaultKind::Depolarize1:
            return 3;
        case FaultKind::Depolarize2:
            return 15;
        default:
            return 1;
    }
}

double component_probability(const FaultSite& site) {
    return site.probability / component_count(site.kind);
}

FrameSimulator::FrameSimulator(const CodeLayout& layout, Basis basis, NoiseParams noise, std::vector<InjectionSpec> injections)
    : layout_(&layout), basis_(basis), noise_(noise), injections_(std::move(injections)) {
    noise_.validate();
    for (const auto& inj : injections_) {
        inj.validate(layout);
    }
    const uint32_t nd = static_cast<uint32_t>(layout.num_data());
    auto anc_qubit = [nd](uint32_t a) { return nd + a; };

    if (basis_ == Basis::X) {
        for (uint32_t q = 0; q < nd; ++q) {
            prep_ops_.push_back({OpCode::H, q, 0, 0});
            prep_ops_.push_back({OpCode::Dep1, q, 0, noise_.p1});
        }
    }

    for (uint32_t k = 0; k < injections_.size(); ++k) {
        round_ops_.push_back({OpCode::Inject, injections_[k].target, k, injections_[k].flip_probability()});
    }
    for (uint32_t a : layout.ancillas_of_type(StabilizerType::X)) {
        round_ops_.push_back({OpCode::H, anc_qubit(a), 0, 0});
        round_ops_.push_back({OpCode::Dep1, anc_qubit(a), 0, noise_.p1});
    }
    for (int step = 0; step < 4; ++step) {
        for (const auto& anc : layout.ancillas()) {
            const int partner = anc.schedule[step];
            if (partner == kNoPartner) {
                continue;
            }
            const uint32_t data = static_cast<uint32_t>(partner);
            const uint32_t aq = anc_qubit(anc.index);
            if (anc.type == StabilizerType::Z) {
                round_ops_.push_back({OpCode::CX, data, aq, 0});
            } else {
                round_ops_.push_back({OpCode::CX, aq, data, 0});
            }
            round_ops_.push_back({OpCode::Dep2, data, aq, noise_.p2});
        }
    }
    for (uint32_t a : layout.ancillas_of_type(StabilizerType::X)) {
        round_ops_.push_back({OpCode::H, anc_qubit(a), 0, 0});
        round_ops_.push_back({OpCode::Dep1, anc_qubit(a), 0, noise_.p1});
    }
    for (const auto& anc : layout.ancillas()) {
        round_ops_.push_back({OpCode::MeasureAncilla, anc_qubit(anc.index), anc.index, noise_.p_meas});
    }
    for (uint32_t q = 0; q < nd; ++q) {
        round_ops_.push_back({OpCode::Dep1, q, 0, noise_.p_idle});
    }

    if (basis_ == Basis::X) {
        for (uint32_t q = 0; q < nd; ++q) {
            final_ops_.push_back({OpCode::H, q, 0, 0});
            final_ops_.push_back({OpCode::Dep1, q, 0, noise_.p1});
        }
    }
    for (uint32_t q = 0; q < nd; ++q) {
        final_ops_.push_back({OpCode::MeasureData, q, q, noise_.p_meas});
    }
}

double FrameSimulator::uniform() {
    return static_cast<double>(noise_rng_() >> 11) * 0x1.0p-53;
}

void FrameSimulator::start(Mode mode) {
    mode_ = mode;
    const size_t n = layout_->num_qubits();
    ex_.assign(n, 0);
    ez_.assign(n, 0);
    gx_.assign(n, 0);
    gz_.assign(n, 0);
    data_flips_.assign(layout_->num_data(), 0);
    record_.assign(layout_->num_ancillas(), 0);
    round_ = 0;
    measured_ = false;
    site_counter_ = 0;
    if (mode_ == Mode::Sample) {
        for (size_t q = 0; q < n; ++q) {
            gz_[q] = static_cast<uint8_t>(gauge_rng_() & 1);
        }
    }
    for (const auto& op : prep_ops_) {
        execute(op);
    }
}

void FrameSimulator::begin_shot(uint64_t shot_seed) {
    noise_rng_.seed(derive_seed(shot_seed, 0));
    gauge_rng_.seed(derive_seed(shot_seed, 1));
    pulse_rng_.seed(derive_seed(shot_seed, 2));
    forced_.reset();
    start(Mode::Sample);
}

void FrameSimulator::begin_probe(std::optional<ForcedFault> fault) {
    forced_ = fault;
    start(Mode::Probe);
}

void FrameSimulator::begin_enumeration() {
    forced_.reset();
    sites_.clear();
    start(Mode::Enumerate);
}

void FrameSimulator::apply_pauli(uint32_t q, uint32_t xz) {
    ex_[q] ^= static_cast<uint8_t>(xz & 1);
    ez_[q] ^= static_cast<uint8_t>((xz >> 1) & 1);
}

uint32_t FrameSimulator::draw_component(FaultKind kind, uint32_t q0, uint32_t q1, double p, PauliAxis axis) {
    switch (mode_) {
        case Mode::Sample: {
            if (p <= 0.0 || uniform() >= p) {
                return 0;
            }
            const uint32_t k = component_count(kind);
            return k == 1 ? 1 : 1 + static_cast<uint32_t>(noise_rng_() % k);
        }
        case Mode::Enumerate:
            if (p > 0.0) {
                sites_.push_back({kind, q0, q1, p, round_, axis});
            }
            return 0;
        case Mode::Probe:
            if (p <= 0.0) {
                return 0;
            }
            if (forced_ && forced_->site == site_counter_++) {
                return forced_->component;
            }
            return 0;
    }
    return 0;
}

void FrameSimulator::execute(const Op& op) {
    switch (op.code) {
        case OpCode::H:
            std::swap(ex_[op.a], ez_[op.a]);
            std::swap(gx_[op.a], gz_[op.a]);
            break;
        case OpCode::CX:
            ex_[op.b] ^= ex_[op.a];
            ez_[op.a] ^= ez_[op.b];
            gx_[op.b] ^= gx_[op.a];
            gz_[op.a] ^= gz_[op.b];
            break;
        case OpCode::Dep1: {
            // Component c encodes the Pauli as x = bit 0, z = bit 1.
            uint32_t c = draw_component(FaultKind::Depolarize1, op.a, 0, op.p);
            if (c) {
                apply_pauli(op.a, c);
            }
            break;
        }
        case OpCode::Dep2: {
            uint32_t c = draw_component(FaultKind::Depolarize2, op.a, op.b, op.p);
            if (c) {
                apply_pauli(op.a, c & 3);
                apply_pauli(op.b, c >> 2);
            }
            break;
        }
        case OpCode::Inject: {
            const auto& inj = injections_[op.b];
            if (!inj.applies_to(round_)) {
                break;
            }
            uint32_t c = draw_component(FaultKind::Injection, op.a, 0, op.p, inj.axis);
            if (c) {
                apply_pauli(op.a, inj.axis == PauliAxis::X ? 1u : 2u);
            }
            break;
        }
        case OpCode::MeasureAncilla: {
            uint32_t flip = draw_component(FaultKind::MeasureFlip, op.a, 0, op.p);
            record_[op.b] = static_cast<uint8_t>((ex_[op.a] ^ gx_[op.a] ^ flip) & 1);
            // The post-measurement state is a Z eigenstate; the Z part of the
            // frame is meaningless from here on.
            ez_[op.a] = 0;
            gz_[op.a] = mode_ == Mode::Sample ? static_cast<uint8_t>(gauge_rng_() & 1) : 0;
            break;
        }
        case OpCode::MeasureData: {
            uint32_t flip = draw_component(FaultKind::MeasureFlip, op.a, 0, op.p);
            data_flips_[op.b] = static_cast<uint8_t>(flip & 1);
            record_[op.b] = static_cast<uint8_t>((ex_[op.a] ^ gx_[op.a] ^ flip) & 1);
            break;
        }
    }
}

std::vector<uint8_t> FrameSimulator::run_round() {
    if (measured_) {
        throw std::logic_error("run_round after the final data measurement");
    }
    ++round_;
    record_.assign(layout_->num_ancillas(), 0);
    for (const auto& op : round_ops_) {
        execute(op);
    }
    return record_;
}

void FrameSimulator::apply_correction(uint32_t data, PauliAxis axis) {
    if (data >= layout_->num_data()) {
        throw std::out_of_range("correction target is not a data qubit");
    }
    apply_pauli(data, axis == PauliAxis::X ? 1u : 2u);
    if (mode_ == Mode::Sample && noise_.p1 > 0) {
        const double u = static_cast<double>(pulse_rng_() >> 11) * 0x1.0p-53;
        if (u < noise_.p1) {
            apply_pauli(data, 1 + static_cast<uint32_t>(pulse_rng_() % 3));
        }
    }
}

std::vector<uint8_t> FrameSimulator::measure_data() {
    if (measured_) {
        throw std::logic_error("data already measured");
    }
    ++round_;
    record_.assign(layout_->num_data(), 0);
    for (const auto& op : final_ops_) {
        execute(op);
    }
    measured_ = true;
    return record_;
}

bool FrameSimulator::truth_x_flip() const {
    // X errors flip Z_L. After an X-basis readout the final H layer has turned
    // earlier X components into Z components.
    const bool swapped = measured_ && basis_ == Basis::X;
    uint8_t parity = 0;
    for (uint32_t q : layout_->logical_z_support()) {
        parity ^= swapped ? ez_[q] : ex_[q];
        if (measured_ && basis_ == Basis::Z) {
            parity ^= data_flips_[q];
        }
    }
    return parity & 1;
}

bool FrameSimulator::truth_z_flip() const {
    const bool swapped = measured_ && basis_ == Basis::X;
    uint8_t parity = 0;
    for (uint32_t q : layout_->logical_x_support()) {
        parity ^= swapped ? static_cast<uint8_t>(ex_[q] ^ data_flips_[q]) : ez_[q];
    }
    return parity & 1;
}

void validate_experiment(
    const CodeLayout& layout, uint32_t rounds, const NoiseParams& noise, const std::vector<InjectionSpec>& injections) {
    if (rounds < 1) {
        throw std::invalid_argument("rounds must be >= 1");
    }
    noise.validate();
    for (const auto& inj : injections) {
        inj.validate(layout);
        if (inj.schedule == InjectionSchedule::BeforeRound && inj.round > rounds) {
            throw std::invalid_argument("injection " + inj.to_string() + " is scheduled after the last round (" +
                                        std::to_string(rounds) + ")");
        }
    }
}

ShotRecord sample_shot(FrameSimulator& sim, uint32_t rounds, uint64_t seed, uint64_t shot_index) {
    ShotRecord rec;
    rec.distance = static_cast<uint16_t>(sim.layout().distance());
    rec.rounds = static_cast<uint16_t>(rounds);
    rec.basis = sim.basis();
    rec.seed = derive_seed(seed, shot_index);
    sim.begin_shot(rec.seed);
    rec.ancilla_bits.reserve(rounds * sim.layout().num_ancillas());
    for (uint32_t r = 0; r < rounds; ++r) {
        auto bits = sim.run_round();
        rec.ancilla_bits.insert(rec.ancilla_bits.end(), bits.begin(), bits.end());
    }
    rec.data_bits = sim.measure_data();
    rec.truth_x_flip = sim.truth_x_flip();
    rec.truth_z_flip = sim.truth_z_flip();
    return rec;
}

std::vector<ShotRecord> sample_memory(
    const CodeLayout& layout,
    Basis basis,
    uint32_t rounds,
    const NoiseParams& noise,
    const std::vector<InjectionSpec>& injections,
    uint64_t shots,
    uint64_t seed,
    unsigned workers,
    uint64_t first_shot) {
    validate_experiment(layout, rounds, noise, injections);
    if (shots < 1) {
        throw std::invalid_argument("shots must be >= 1");
    }
    std::vector<ShotRecord> out(shots);
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::min<uint64_t>(shots, 1024))));
    auto work = [&](uint64_t begin, uint64_t end) {
        FrameSimulator sim(layout, basis, noise, injections);
        for (uint64_t k = begin; k < end; ++k) {
            out[k] = sample_shot(sim, rounds, seed, first_shot + k);
        }
    };
    if (workers == 1) {
        work(0, shots);
        return out;
    }
    std::vector<std::thread> threads;
    const uint64_t per = (shots + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const uint64_t b = w * per;
        const uint64_t e = std::min<uint64_t>(shots, b + per);
        if (b < e) {
            threads.emplace_back(work, b, e);
        }
    }
    for (auto& t : threads) {
        t.join();
    }
    return out;
}

}  // namespace rtqec

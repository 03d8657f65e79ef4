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

#include "rtqec/realtime_loop.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>
#include <thread>

#include "rtqec/syndrome.h"

namespace rtqec {

namespace {

const char* kBudgetKeys[] = {"daq_sampling_ns", "syndrome_ns", "nn_core_ns", "pfu_ns", "adc_ns", "demod_ns",
                             "classify_ns", "comm_ns", "backplane_ns", "trigger_ns", "wavegen_ns", "dac_ns"};

uint32_t* budget_field(LatencyBudget& b, size_t i) {
    uint32_t* fields[] = {&b.daq_sampling_ns, &b.syndrome_ns, &b.nn_core_ns, &b.pfu_ns, &b.adc_ns, &b.demod_ns,
                          &b.classify_ns, &b.comm_ns, &b.backplane_ns, &b.trigger_ns, &b.wavegen_ns, &b.dac_ns};
    return fields[i];
}

void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& known, const char* what) {
    if (!j.is_object()) {
        throw std::invalid_argument(std::string(what) + " must be a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) {
            throw std::invalid_argument(std::string("unknown ") + what + " key '" + key + "'");
        }
    }
}

}  // namespace

nlohmann::json LatencyBudget::to_json() const {
    nlohmann::json j;
    LatencyBudget copy = *this;
    for (size_t i = 0; i < std::size(kBudgetKeys); ++i) j[kBudgetKeys[i]] = *budget_field(copy, i);
    return j;
}

LatencyBudget LatencyBudget::from_json(const nlohmann::json& j) {
    reject_unknown_keys(j, std::set<std::string>(std::begin(kBudgetKeys), std::end(kBudgetKeys)), "budget");
    LatencyBudget b;
    for (size_t i = 0; i < std::size(kBudgetKeys); ++i) {
        if (j.contains(kBudgetKeys[i])) *budget_field(b, i) = j.at(kBudgetKeys[i]).get<uint32_t>();
    }
    return b;
}

const char* decoder_name(DecoderKind k) {
    switch (k) {
        case DecoderKind::None:
            return "none";
        case DecoderKind::Nn:
            return "nn";
        case DecoderKind::Mwpm:
            return "mwpm";
    }
    return "?";
}

DecoderKind parse_decoder(std::string_view text) {
    if (text == "none") return DecoderKind::None;
    if (text == "nn") return DecoderKind::Nn;
    if (text == "mwpm") return DecoderKind::Mwpm;
    throw std::invalid_argument("decoder must be one of none, nn, mwpm (got '" + std::string(text) + "')");
}

std::string state_label(Basis basis, int sign) {
    if (basis == Basis::Z) return sign > 0 ? "0" : "1";
    return sign > 0 ? "+" : "-";
}

std::pair<Basis, int> parse_state(std::string_view label) {
    if (label == "0") return {Basis::Z, +1};
    if (label == "1") return {Basis::Z, -1};
    if (label == "+") return {Basis::X, +1};
    if (label == "-") return {Basis::X, -1};
    throw std::invalid_argument("state must be one of 0, 1, +, - (got '" + std::string(label) + "')");
}

std::vector<uint32_t> LoopConfig::evaluated_rounds() const {
    if (!round_values.empty()) return round_values;
    std::vector<uint32_t> out;
    for (uint32_t n = 1; n <= rounds; ++n) out.push_back(n);
    return out;
}

void LoopConfig::validate() const {
    build_layout(distance);
    if (rounds == 0) {
        throw std::invalid_argument("rounds must be at least 1");
    }
    for (uint32_t n : round_values) {
        if (n == 0 || n > rounds) {
            throw std::invalid_argument("round_values entries must lie in 1..rounds");
        }
    }
    if (prepared_sign != 1 && prepared_sign != -1) {
        throw std::invalid_argument("prepared_sign must be +1 or -1");
    }
    if (qec_cycle_ns == 0) {
        throw std::invalid_argument("qec_cycle_ns must be positive");
    }
    if (decoder == DecoderKind::Nn && (weights_x.empty() || weights_z.empty())) {
        throw std::invalid_argument("decoder nn needs weight files for both stabilizer types (weights_x, weights_z)");
    }
    if (decoder == DecoderKind::None && final_pfu) {
        throw std::invalid_argument("final_pfu needs a decoder");
    }
    if (decoder_prior) decoder_prior->validate();
}

nlohmann::json LoopConfig::to_json() const {
    nlohmann::json j = {
        {"distance", distance},
        {"rounds", rounds},
        {"round_values", round_values},
        {"feedback_period", feedback_period},
        {"feedback", feedback},
        {"delay_ns", delay_ns},
        {"qec_cycle_ns", qec_cycle_ns},
        {"decoder", decoder_name(decoder)},
        {"final_pfu", final_pfu},
        {"state", state_label(basis, prepared_sign)},
        {"weights_x", weights_x},
        {"weights_z", weights_z},
        {"budget", budget.to_json()},
    };
    j["decoder_prior"] = decoder_prior ? decoder_prior->to_json() : nlohmann::json(nullptr);
    return j;
}

LoopConfig LoopConfig::from_json(const nlohmann::json& j) {
    reject_unknown_keys(j,
                        {"distance", "rounds", "round_values", "feedback_period", "feedback", "delay_ns", "qec_cycle_ns",
                         "decoder", "final_pfu", "state", "basis", "weights_x", "weights_z", "budget", "decoder_prior"},
                        "loop config");
    LoopConfig c;
    if (j.contains("distance")) c.distance = j.at("distance").get<int>();
    if (j.contains("rounds")) c.rounds = j.at("rounds").get<uint32_t>();
    if (j.contains("round_values")) c.round_values = j.at("round_values").get<std::vector<uint32_t>>();
    if (j.contains("feedback_period")) c.feedback_period = j.at("feedback_period").get<uint32_t>();
    if (j.contains("feedback")) c.feedback = j.at("feedback").get<bool>();
    if (j.contains("delay_ns")) c.delay_ns = j.at("delay_ns").get<uint32_t>();
    if (j.contains("qec_cycle_ns")) c.qec_cycle_ns = j.at("qec_cycle_ns").get<uint32_t>();
    if (j.contains("decoder")) c.decoder = parse_decoder(j.at("decoder").get<std::string>());
    if (j.contains("final_pfu")) c.final_pfu = j.at("final_pfu").get<bool>();
    if (j.contains("state")) {
        auto [b, s] = parse_state(j.at("state").get<std::string>());
        c.basis = b;
        c.prepared_sign = s;
    }
    if (j.contains("basis")) {
        const Basis b = parse_basis(j.at("basis").get<std::string>());
        if (j.contains("state") && b != c.basis) {
            throw std::invalid_argument("basis conflicts with state");
        }
        c.basis = b;
    }
    if (j.contains("weights_x")) c.weights_x = j.at("weights_x").get<std::string>();
    if (j.contains("weights_z")) c.weights_z = j.at("weights_z").get<std::string>();
    if (j.contains("budget")) c.budget = LatencyBudget::from_json(j.at("budget"));
    if (j.contains("decoder_prior") && !j.at("decoder_prior").is_null()) {
        c.decoder_prior = NoiseParams::from_json(j.at("decoder_prior"));
    }
    return c;
}

nlohmann::json FeasibilityReport::to_json() const {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& t : rounds) {
        r.push_back({{"round", t.round},
                     {"feedback", t.feedback},
                     {"feasible", t.feasible},
                     {"measure_end_ns", t.measure_end_ns},
                     {"feedback_ns", t.feedback_ns}});
    }
    return {{"feasible", feasible}, {"slack_ns", slack_ns}, {"required_ns", required_ns}, {"rounds", r}};
}

FeasibilityReport check_feasibility(const LoopConfig& config, const LatencyBudget& budget) {
    FeasibilityReport rep;
    rep.required_ns = budget.total();
    rep.slack_ns = static_cast<int64_t>(config.delay_ns) - static_cast<int64_t>(rep.required_ns);
    const bool ok = rep.slack_ns >= 0;
    for (uint32_t n = 1; n <= config.rounds; ++n) {
        RoundTiming t;
        t.round = n;
        t.feedback = config.feedback && config.decoder != DecoderKind::None &&
                     (n == config.rounds || (config.feedback_period > 0 && n % config.feedback_period == 0));
        t.feasible = !t.feedback || ok;
        t.measure_end_ns = static_cast<double>(n) * config.qec_cycle_ns + static_cast<double>(n - 1) * config.delay_ns;
        t.feedback_ns = t.measure_end_ns + config.delay_ns;
        rep.feasible = rep.feasible && t.feasible;
        rep.rounds.push_back(t);
    }
    return rep;
}

nlohmann::json BacklogReport::to_json() const {
    return {{"zero_backlog", zero_backlog},
            {"slack_ns", slack_ns},
            {"backlog_per_round_ns", backlog_per_round_ns},
            {"final_backlog_ns", final_backlog_ns},
            {"worst_latency_ns", worst_latency_ns},
            {"queue_ns", queue_ns}};
}

BacklogReport check_throughput(const LoopConfig& config, const DecoderTiming& timing) {
    BacklogReport rep;
    rep.slack_ns = static_cast<int64_t>(config.qec_cycle_ns) - static_cast<int64_t>(timing.throughput_ns);
    PipelineModel model(timing.latency_ns, timing.throughput_ns);
    for (const auto& e : model.run(config.rounds, config.qec_cycle_ns)) {
        rep.queue_ns.push_back(e.queue_cycles());
        rep.worst_latency_ns = std::max<uint64_t>(rep.worst_latency_ns, e.latency_cycles());
    }
    rep.final_backlog_ns = rep.queue_ns.empty() ? 0 : rep.queue_ns.back();
    rep.backlog_per_round_ns = rep.slack_ns < 0 ? static_cast<uint64_t>(-rep.slack_ns) : 0;
    rep.zero_backlog = rep.slack_ns >= 0;
    return rep;
}

nlohmann::json DecayFit::to_json() const {
    return {{"valid", valid},
            {"epsilon", epsilon},
            {"epsilon_err", epsilon_err},
            {"slope", slope},
            {"slope_err", slope_err},
            {"weighted", weighted},
            {"chi2", chi2},
            {"scale_factor", scale_factor},
            {"used", used},
            {"excluded", excluded},
            {"residuals", residuals},
            {"warning", warning}};
}

DecayFit fit_decay(std::span<const DecayPoint> points) {
    if (points.size() < 3) {
        throw std::invalid_argument("fit_decay needs at least three points");
    }
    DecayFit fit;
    std::vector<const DecayPoint*> use;
    for (const auto& p : points) {
        if (p.n == 0) {
            throw std::invalid_argument("fit_decay points need n >= 1");
        }
        if (!(p.f <= 1.0)) {
            throw std::invalid_argument("fidelity above 1");
        }
        if (p.f <= 0.0) {
            fit.excluded.push_back(p.n);
        } else {
            use.push_back(&p);
            fit.used.push_back(p.n);
        }
    }
    if (!fit.excluded.empty()) {
        fit.warning = std::to_string(fit.excluded.size()) + " point(s) with F <= 0 excluded";
    }
    if (use.empty()) {
        fit.warning = "no point with F > 0";
        return fit;
    }
    fit.weighted = std::all_of(use.begin(), use.end(), [](const DecayPoint* p) { return p->sigma > 0.0; });
    double sxy = 0.0, sxx = 0.0;
    for (const DecayPoint* p : use) {
        const double y = std::log(p->f);
        const double w = fit.weighted ? (p->f * p->f) / (p->sigma * p->sigma) : 1.0;
        sxy += w * p->n * y;
        sxx += w * static_cast<double>(p->n) * p->n;
    }
    fit.slope = sxy / sxx;
    double ss = 0.0;
    for (const DecayPoint* p : use) {
        const double r = std::log(p->f) - fit.slope * p->n;
        fit.residuals.push_back(r);
        const double w = fit.weighted ? (p->f * p->f) / (p->sigma * p->sigma) : 1.0;
        ss += w * r * r;
    }
    if (fit.weighted) {
        fit.chi2 = ss;
        if (use.size() > 1) fit.scale_factor = std::max(1.0, std::sqrt(ss / static_cast<double>(use.size() - 1)));
        fit.slope_err = fit.scale_factor * std::sqrt(1.0 / sxx);
    } else if (use.size() > 1) {
        fit.slope_err = std::sqrt(ss / static_cast<double>(use.size() - 1) / sxx);
    }
    const double decay = std::exp(fit.slope);
    fit.epsilon = (1.0 - decay) / 2.0;
    fit.epsilon_err = decay * fit.slope_err / 2.0;
    fit.valid = true;
    return fit;
}

NnStreamDecoder::NnStreamDecoder(QLstmWeights weights) : decoder_(std::move(weights)) {
}

void NnStreamDecoder::reset() {
    decoder_.reset();
}

bool NnStreamDecoder::push(std::span<const uint8_t> defects) {
    return decoder_.push(defects).flip;
}

bool NnStreamDecoder::finish(std::span<const uint8_t> final_defects) {
    return decoder_.push(final_defects).flip;
}

std::shared_ptr<const MwpmGraphSet> MwpmGraphSet::build(
    const CodeLayout& layout,
    Basis basis,
    uint32_t rounds,
    const NoiseParams& prior,
    StabilizerType type,
    const std::vector<InjectionSpec>& injections) {
    auto set = std::make_shared<MwpmGraphSet>();
    set->type = type;
    for (uint32_t r = 1; r <= rounds; ++r) {
        set->truncated.push_back(build_graph(layout, basis, rounds, prior, type, injections, {r, false}));
    }
    if (type == measured_type(basis)) {
        set->full = build_graph(layout, basis, rounds, prior, type, injections, {rounds, true});
    }
    return set;
}

MwpmStreamDecoder::MwpmStreamDecoder(std::shared_ptr<const MwpmGraphSet> graphs) : graphs_(std::move(graphs)) {
}

void MwpmStreamDecoder::reset() {
    nodes_.clear();
    round_ = 0;
}

bool MwpmStreamDecoder::push(std::span<const uint8_t> defects) {
    if (round_ >= graphs_->truncated.size()) {
        throw std::logic_error("more rounds than the graph set covers");
    }
    const DetectorGraph& g = graphs_->truncated[round_++];
    append_round_nodes(g, round_, defects, nodes_);
    auto m = decode(g, nodes_);
    ambiguous_ += m.flip_ambiguous;
    return m.logical_flip;
}

bool MwpmStreamDecoder::finish(std::span<const uint8_t> final_defects) {
    if (!graphs_->full || round_ != graphs_->truncated.size()) {
        throw std::logic_error("final decode needs the measured type after every round");
    }
    const DetectorGraph& g = *graphs_->full;
    std::vector<uint32_t> nodes = nodes_;
    append_round_nodes(g, round_ + 1, final_defects, nodes);
    auto m = decode(g, nodes);
    ambiguous_ += m.flip_ambiguous;
    return m.logical_flip;
}

double RoundPoint::success_probability() const {
    return shots ? static_cast<double>(successes) / static_cast<double>(shots) : 0.0;
}

double RoundPoint::fidelity() const {
    return fidelity_from_success(success_probability());
}

double RoundPoint::fidelity_err() const {
    if (!shots) return 0.0;
    const double p = success_probability();
    return 2.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(shots));
}

std::string ExperimentResult::csv() const {
    std::string out = "n,F,err,P,shots,successes\n";
    char line[160];
    for (const auto& p : points) {
        std::snprintf(line, sizeof line, "%u,%.6f,%.6f,%.6f,%llu,%llu\n", p.n, p.fidelity(), p.fidelity_err(),
                      p.success_probability(), static_cast<unsigned long long>(p.shots),
                      static_cast<unsigned long long>(p.successes));
        out += line;
    }
    return out;
}

nlohmann::json ExperimentResult::to_json() const {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : points) {
        pts.push_back({{"n", p.n},
                       {"F", p.fidelity()},
                       {"err", p.fidelity_err()},
                       {"P", p.success_probability()},
                       {"shots", p.shots},
                       {"successes", p.successes},
                       {"pulses_applied", p.pulses_applied},
                       {"pulses_dropped", p.pulses_dropped}});
    }
    nlohmann::json inj = nlohmann::json::array();
    for (const auto& i : injections) inj.push_back(i.to_json());
    return {{"config", config.to_json()},
            {"noise", noise.to_json()},
            {"injections", inj},
            {"shots", shots},
            {"seed", seed},
            {"points", pts},
            {"fit", fit.to_json()},
            {"feasibility", feasibility.to_json()},
            {"backlog", backlog.to_json()}};
}

ShotOutcome run_shot(
    FrameSimulator& sim,
    const LoopConfig& config,
    uint32_t rounds,
    StreamDecoder& decoder_z,
    StreamDecoder& decoder_x,
    bool feasible,
    bool keep_plans) {
    const CodeLayout& layout = sim.layout();
    const Basis basis = sim.basis();
    ShotOutcome out;
    decoder_z.reset();
    decoder_x.reset();
    SyndromeStream stream(layout, basis);
    PauliFrame frame;
    bool est_z = false, est_x = false;
    std::vector<CancellationInstruction> pending;
    const bool active = config.decoder != DecoderKind::None;

    for (uint32_t n = 1; n <= rounds; ++n) {
        const auto bits = sim.run_round();
        const auto rd = stream.push(bits, pending);
        pending.clear();
        for (auto v : rd.z) out.residual_defects += v;
        for (auto v : rd.x) out.residual_defects += v;

        const bool new_z = decoder_z.push(rd.z);
        const bool new_x = decoder_x.push(rd.x);
        frame = apply_verdict(frame, new_x != est_x, new_z != est_z);
        est_z = new_z;
        est_x = new_x;

        const bool window = config.feedback && active &&
                            (n == rounds || (config.feedback_period > 0 && n % config.feedback_period == 0));
        if (!window || frame.identity()) continue;
        if (!feasible) {
            // The pulse misses its slot; the frame keeps the flip.
            out.pulses_dropped += (frame.sign_x < 0) + (frame.sign_z < 0);
            continue;
        }
        const double t = static_cast<double>(n) * config.qec_cycle_ns + static_cast<double>(n) * config.delay_ns;
        auto [plan, reset_frame] = plan_feedback(frame, layout, n + 1, t);
        for (const auto& p : plan.pulses) sim.apply_correction(p.data, p.gate);
        out.pulses_applied += static_cast<uint32_t>(plan.pulses.size());
        pending = plan.cancellations;
        frame = reset_frame;
        if (keep_plans) out.plans.push_back(std::move(plan));
    }

    const auto data = sim.measure_data();
    const FinalFrame final_frame = stream.finalize(data, pending);
    for (auto v : final_frame.defects) out.residual_defects += v;

    // The simulator prepares the +1 eigenstate; a -1 preparation is an ideal
    // logical flip at time zero.
    out.raw_bit = raw_logical_parity(layout, basis, data) ^ (config.prepared_sign < 0);
    out.corrected_bit = out.raw_bit;
    if (config.final_pfu) {
        StreamDecoder& measured = basis == Basis::Z ? decoder_z : decoder_x;
        const bool est = basis == Basis::Z ? est_z : est_x;
        const int eig = final_pfu(frame, final_frame, layout, basis, data,
                                  [&](const FinalFrame& f) { return measured.finish(f.defects) != est; });
        out.corrected_bit = (eig < 0) ^ (config.prepared_sign < 0);
    }
    out.frame = frame;
    out.success = out.corrected_bit == (config.prepared_sign < 0);
    return out;
}

namespace {

struct Tally {
    uint64_t successes = 0;
    uint64_t applied = 0;
    uint64_t dropped = 0;
};

std::unique_ptr<StreamDecoder> make_decoder(
    const LoopConfig& config,
    StabilizerType type,
    const std::shared_ptr<const MwpmGraphSet>& graphs,
    const std::optional<QLstmWeights>& weights) {
    switch (config.decoder) {
        case DecoderKind::None:
            return std::make_unique<NullDecoder>();
        case DecoderKind::Nn:
            return std::make_unique<NnStreamDecoder>(*weights);
        case DecoderKind::Mwpm:
            return std::make_unique<MwpmStreamDecoder>(graphs);
    }
    (void)type;
    return nullptr;
}

QLstmWeights load_checked(const std::string& path, StabilizerType type, const CodeLayout& layout) {
    QLstmWeights w = load_weights(path);
    if (w.type != type) {
        throw std::invalid_argument(path + ": weight file is for the other stabilizer type");
    }
    if (w.input_size != layout.stabilizers_per_type()) {
        throw std::invalid_argument(path + ": input size does not match the code distance");
    }
    return w;
}

}  // namespace

ExperimentResult run(
    const LoopConfig& config,
    const NoiseParams& noise,
    const std::vector<InjectionSpec>& injections,
    uint64_t shots,
    uint64_t seed,
    unsigned workers) {
    config.validate();
    const CodeLayout layout = build_layout(config.distance);
    validate_experiment(layout, config.rounds, noise, injections);
    if (shots == 0) {
        throw std::invalid_argument("shots must be at least 1");
    }
    workers = std::max(1u, workers);

    ExperimentResult result;
    result.config = config;
    result.noise = noise;
    result.injections = injections;
    result.shots = shots;
    result.seed = seed;
    result.feasibility = check_feasibility(config, config.budget);
    result.backlog = check_throughput(config);
    const bool feasible = result.feasibility.slack_ns >= 0;

    std::optional<QLstmWeights> wz, wx;
    if (config.decoder == DecoderKind::Nn) {
        wz = load_checked(config.weights_z, StabilizerType::Z, layout);
        wx = load_checked(config.weights_x, StabilizerType::X, layout);
    }
    const NoiseParams prior = config.decoder_prior.value_or(noise);

    for (uint32_t n : config.evaluated_rounds()) {
        std::shared_ptr<const MwpmGraphSet> gz, gx;
        if (config.decoder == DecoderKind::Mwpm) {
            gz = MwpmGraphSet::build(layout, config.basis, n, prior, StabilizerType::Z, injections);
            gx = MwpmGraphSet::build(layout, config.basis, n, prior, StabilizerType::X, injections);
        }
        const uint64_t seed_n = derive_seed(seed, n);
        std::vector<Tally> tallies(workers);
        auto work = [&](unsigned w) {
            const uint64_t begin = shots * w / workers;
            const uint64_t end = shots * (w + 1) / workers;
            FrameSimulator sim(layout, config.basis, noise, injections);
            auto dz = make_decoder(config, StabilizerType::Z, gz, wz);
            auto dx = make_decoder(config, StabilizerType::X, gx, wx);
            Tally& t = tallies[w];
            for (uint64_t k = begin; k < end; ++k) {
                sim.begin_shot(derive_seed(seed_n, k));
                const auto o = run_shot(sim, config, n, *dz, *dx, feasible);
                t.successes += o.success;
                t.applied += o.pulses_applied;
                t.dropped += o.pulses_dropped;
            }
        };
        if (workers == 1) {
            work(0);
        } else {
            std::vector<std::thread> pool;
            std::vector<std::exception_ptr> errors(workers);
            for (unsigned w = 0; w < workers; ++w) {
                pool.emplace_back([&, w] {
                    try {
                        work(w);
                    } catch (...) {
                        errors[w] = std::current_exception();
                    }
                });
            }
            for (auto& th : pool) th.join();
            for (auto& e : errors) {
                if (e) std::rethrow_exception(e);
            }
        }
        RoundPoint pt;
        pt.n = n;
        pt.shots = shots;
        for (const auto& t : tallies) {
            pt.successes += t.successes;
            pt.pulses_applied += t.applied;
            pt.pulses_dropped += t.dropped;
        }
        result.points.push_back(pt);
    }

    std::vector<DecayPoint> dp;
    for (const auto& p : result.points) dp.push_back({p.n, p.fidelity(), p.fidelity_err()});
    if (dp.size() >= 3) {
        result.fit = fit_decay(dp);
    } else {
        result.fit.warning = "fewer than three evaluated rounds";
    }
    return result;
}

RoundPoint replay_shots(
    const LoopConfig& config,
    const NoiseParams& prior,
    const std::vector<InjectionSpec>& injections,
    std::span<const ShotRecord> shots,
    unsigned workers) {
    config.validate();
    const CodeLayout layout = build_layout(config.distance);
    if (shots.empty()) {
        throw std::invalid_argument("no shots to replay");
    }
    const uint32_t n = shots.front().rounds;
    for (const auto& s : shots) {
        if (s.distance != config.distance || s.basis != config.basis || s.rounds != n) {
            throw std::invalid_argument("recorded shots do not match the distance, basis or round count");
        }
    }
    validate_experiment(layout, n, prior, injections);
    workers = std::max(1u, workers);

    std::optional<QLstmWeights> wz, wx;
    std::shared_ptr<const MwpmGraphSet> gz, gx;
    if (config.decoder == DecoderKind::Nn) {
        wz = load_checked(config.weights_z, StabilizerType::Z, layout);
        wx = load_checked(config.weights_x, StabilizerType::X, layout);
    } else if (config.decoder == DecoderKind::Mwpm) {
        gz = MwpmGraphSet::build(layout, config.basis, n, prior, StabilizerType::Z, injections);
        gx = MwpmGraphSet::build(layout, config.basis, n, prior, StabilizerType::X, injections);
    }
    const StabilizerType measured = measured_type(config.basis);

    std::vector<uint64_t> successes(workers, 0);
    auto work = [&](unsigned w) {
        auto dec = make_decoder(config, measured, measured == StabilizerType::Z ? gz : gx,
                                measured == StabilizerType::Z ? wz : wx);
        const size_t begin = shots.size() * w / workers;
        const size_t end = shots.size() * (w + 1) / workers;
        for (size_t k = begin; k < end; ++k) {
            const ShotRecord& rec = shots[k];
            SyndromeStream stream(layout, config.basis);
            dec->reset();
            for (uint32_t r = 1; r <= n; ++r) dec->push(stream.push(rec.round_bits(r)).of(measured));
            const FinalFrame ff = stream.finalize(rec.data_bits);
            const bool est = dec->finish(ff.defects);
            successes[w] += (raw_logical_parity(layout, config.basis, rec.data_bits) ^ est) == 0;
        }
    };
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                work(w);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    RoundPoint pt;
    pt.n = n;
    pt.shots = shots.size();
    for (auto s : successes) pt.successes += s;
    return pt;
}

}  // namespace rtqec

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

#include "cli.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "rtqec/dataset.h"
#include "rtqec/scaling_estimator.h"

namespace rtqec::cli {

namespace {

// Invalid flag values or config contents; reported with exit code 2.
struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(path + ": not valid JSON (" + e.what() + ")");
    }
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<uint32_t> parse_uint_list(const std::string& text, const char* flag) {
    std::vector<uint32_t> out;
    for (const auto& item : split(text, ',')) {
        try {
            size_t used = 0;
            const long v = std::stol(item, &used);
            if (used != item.size() || v < 0) throw std::invalid_argument(item);
            out.push_back(static_cast<uint32_t>(v));
        } catch (const std::exception&) {
            throw UsageError(std::string(flag) + " expects a comma-separated list of integers (got '" + text + "')");
        }
    }
    if (out.empty()) throw UsageError(std::string(flag) + " must not be empty");
    return out;
}

uint64_t fresh_seed() {
    std::random_device rd;
    return (static_cast<uint64_t>(rd()) << 32) ^ rd();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

unsigned default_workers() {
    return std::max(1u, std::thread::hardware_concurrency());
}

nlohmann::json manifest(const std::string& command,
                        const std::vector<std::string>& args,
                        const nlohmann::json& config,
                        const nlohmann::json& outputs,
                        double duration_s) {
    return {{"command", command},
            {"argv", args},
            {"config", config},
            {"versions",
             {{"rtqec", kVersion}, {"dataset", kDatasetMagic}, {"defects", kDefectMagic}, {"weights", kWeightMagic}}},
            {"outputs", outputs},
            {"duration_s", duration_s}};
}

// A run manifest nests the replayable settings under "config".
std::optional<nlohmann::json> manifest_config(const nlohmann::json& j, const std::string& command) {
    if (!j.is_object() || !j.contains("command")) return std::nullopt;
    if (j.at("command") != command) {
        throw UsageError("manifest was written by '" + j.at("command").get<std::string>() + "', not '" + command + "'");
    }
    return j.at("config");
}

std::vector<InjectionSpec> parse_injections(const std::vector<std::string>& specs) {
    std::vector<InjectionSpec> out;
    for (const auto& s : specs) {
        try {
            out.push_back(InjectionSpec::parse(s));
        } catch (const std::invalid_argument& e) {
            throw UsageError(std::string("--inject: ") + e.what());
        }
    }
    return out;
}

nlohmann::json injections_json(const std::vector<InjectionSpec>& inj) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& i : inj) out.push_back(i.to_json());
    return out;
}

std::vector<InjectionSpec> injections_from_json(const nlohmann::json& j) {
    std::vector<InjectionSpec> out;
    for (const auto& i : j) out.push_back(InjectionSpec::from_json(i));
    return out;
}

// --basis and --state both name the measurement basis; they must agree.
std::optional<std::pair<Basis, int>> basis_from_flags(const std::string& basis, const std::string& state) {
    std::optional<std::pair<Basis, int>> out;
    if (!state.empty()) out = parse_state(state);
    if (!basis.empty()) {
        const Basis b = parse_basis(basis);
        if (out && out->first != b) {
            throw UsageError("--basis " + basis + " conflicts with --state " + state + " (state " + state +
                             " is prepared in the " + basis_char(out->first) + " basis)");
        }
        if (!out) out = std::pair{b, +1};
    }
    return out;
}

// ---------------------------------------------------------------- simulate

struct SimulateOpts {
    std::string config;
    int distance = 3;
    uint32_t rounds = 20;
    std::string basis;
    std::string state;
    uint64_t shots = 1000;
    uint64_t seed = 0;
    std::string noise_file;
    std::vector<std::string> inject;
    std::string out;
    std::string defects;
    std::string manifest;
    unsigned workers = 0;
    bool json = false;
};

int cmd_simulate(CLI::App& app, const SimulateOpts& o, const std::vector<std::string>& args, std::ostream& out) {
    const auto t0 = std::chrono::steady_clock::now();
    nlohmann::json base = nlohmann::json::object();
    if (!o.config.empty()) {
        const auto j = read_json_file(o.config);
        base = manifest_config(j, "simulate").value_or(j);
    }
    auto given = [&](const char* flag) { return app.count(flag) > 0; };

    int distance = given("--distance") ? o.distance : base.value("distance", o.distance);
    uint32_t rounds = given("--rounds") ? o.rounds : base.value("rounds", o.rounds);
    uint64_t shots = given("--shots") ? o.shots : base.value("shots", o.shots);
    Basis basis = base.contains("basis") ? parse_basis(base.at("basis").get<std::string>()) : Basis::Z;
    if (auto fb = basis_from_flags(o.basis, o.state)) {
        if (fb->second < 0) throw UsageError("datasets record the +1 eigenstate; use --state 0 or --state +");
        basis = fb->first;
    }
    NoiseParams noise = base.contains("noise") ? NoiseParams::from_json(base.at("noise")) : NoiseParams{};
    if (!o.noise_file.empty()) noise = NoiseParams::from_json(read_json_file(o.noise_file));
    auto injections = base.contains("injections") ? injections_from_json(base.at("injections")) : std::vector<InjectionSpec>{};
    if (given("--inject")) injections = parse_injections(o.inject);
    uint64_t seed = given("--seed") ? o.seed : (base.contains("seed") ? base.at("seed").get<uint64_t>() : fresh_seed());
    const unsigned workers = o.workers ? o.workers : default_workers();

    if (shots == 0 || shots > UINT32_MAX) throw UsageError("--shots must lie in 1..4294967295");
    if (rounds == 0 || rounds > UINT16_MAX) throw UsageError("--rounds must lie in 1..65535");
    CodeLayout layout = [&] {
        try {
            return build_layout(distance);
        } catch (const std::invalid_argument& e) {
            throw UsageError(std::string("--distance: ") + e.what());
        }
    }();
    try {
        validate_experiment(layout, rounds, noise, injections);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (o.out.empty()) throw UsageError("--out is required");

    DatasetHeader header;
    header.distance = static_cast<uint16_t>(distance);
    header.rounds = static_cast<uint16_t>(rounds);
    header.basis = basis;
    header.seed = seed;
    header.metadata = dataset_metadata(noise, injections);
    {
        DatasetWriter writer(o.out, header);
        const uint64_t chunk = 20000;
        for (uint64_t first = 0; first < shots; first += chunk) {
            const uint64_t n = std::min(chunk, shots - first);
            for (const auto& rec : sample_memory(layout, basis, rounds, noise, injections, n, seed, workers, first)) {
                writer.write(rec);
            }
        }
        writer.close();
    }
    nlohmann::json outputs = {{"dataset", o.out}};
    if (!o.defects.empty()) {
        export_defects(o.out, o.defects);
        outputs["defects"] = o.defects;
    }
    const std::string manifest_path = o.manifest.empty() ? o.out + ".manifest.json" : o.manifest;
    outputs["manifest"] = manifest_path;
    const nlohmann::json config = {{"distance", distance},
                                   {"rounds", rounds},
                                   {"basis", std::string(1, basis_char(basis))},
                                   {"shots", shots},
                                   {"seed", seed},
                                   {"noise", noise.to_json()},
                                   {"injections", injections_json(injections)},
                                   {"workers", workers}};
    const auto m = manifest("simulate", args, config, outputs, seconds_since(t0));
    write_file(manifest_path, m.dump(2) + "\n");
    if (o.json) {
        out << nlohmann::json({{"ok", true}, {"manifest", m}}).dump(2) << "\n";
    } else {
        out << "wrote " << shots << " shots (d=" << distance << ", " << rounds << " rounds, basis "
            << basis_char(basis) << ", seed " << seed << ") to " << o.out << "\n";
    }
    return kExitOk;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateOpts {
    std::string config;
    std::vector<std::string> datasets;
    std::string decoders;
    int distance = 3;
    uint32_t rounds = 10;
    std::string round_values;
    uint32_t feedback_period = 0;
    bool no_feedback = false;
    uint32_t delay_ns = 550;
    uint32_t cycle_ns = 1250;
    bool final_pfu = false;
    std::string basis;
    std::string state;
    std::string weights_x;
    std::string weights_z;
    std::string noise_file;
    std::string prior_file;
    std::string budget_file;
    std::vector<std::string> inject;
    uint64_t shots = 10000;
    uint64_t seed = 0;
    unsigned workers = 0;
    std::string out_csv;
    std::string out_json;
    std::string plot;
    std::string manifest;
    bool json = false;
};

struct DecoderResult {
    DecoderKind kind;
    std::vector<RoundPoint> points;
    DecayFit fit;
};

std::string results_csv(const std::vector<DecoderResult>& results) {
    if (results.size() == 1) {
        ExperimentResult r;
        r.points = results[0].points;
        return r.csv();
    }
    std::string out = "decoder,n,F,err,P,shots,successes\n";
    for (const auto& res : results) {
        ExperimentResult r;
        r.points = res.points;
        const std::string body = r.csv();
        for (const auto& line : split(body.substr(body.find('\n') + 1), '\n')) {
            out += std::string(decoder_name(res.kind)) + "," + line + "\n";
        }
    }
    return out;
}

DecayFit fit_points(const std::vector<RoundPoint>& points) {
    if (points.size() < 3) {
        DecayFit f;
        f.warning = "fewer than three evaluated rounds";
        return f;
    }
    std::vector<DecayPoint> dp;
    for (const auto& p : points) dp.push_back({p.n, p.fidelity(), p.fidelity_err()});
    return fit_decay(dp);
}

int cmd_evaluate(CLI::App& app, const EvaluateOpts& o, const std::vector<std::string>& args, std::ostream& out,
                 std::ostream& err) {
    const auto t0 = std::chrono::steady_clock::now();
    auto given = [&](const char* flag) { return app.count(flag) > 0; };

    nlohmann::json base = nlohmann::json::object();
    nlohmann::json loop_json = nlohmann::json::object();
    if (!o.config.empty()) {
        const auto j = read_json_file(o.config);
        if (auto m = manifest_config(j, "evaluate")) {
            base = *m;
            loop_json = base.at("loop");
        } else {
            loop_json = j;
        }
    }
    LoopConfig config;
    try {
        config = LoopConfig::from_json(loop_json);
    } catch (const std::exception& e) {
        throw UsageError(std::string("--config: ") + e.what());
    }
    if (given("--distance")) config.distance = o.distance;
    if (given("--rounds")) config.rounds = o.rounds;
    if (given("--round-values")) config.round_values = parse_uint_list(o.round_values, "--round-values");
    if (given("--feedback-period")) config.feedback_period = o.feedback_period;
    if (o.no_feedback) config.feedback = false;
    if (given("--delay")) config.delay_ns = o.delay_ns;
    if (given("--cycle")) config.qec_cycle_ns = o.cycle_ns;
    if (o.final_pfu) config.final_pfu = true;
    if (auto fb = basis_from_flags(o.basis, o.state)) {
        config.basis = fb->first;
        config.prepared_sign = fb->second;
    }
    if (given("--weights-x")) config.weights_x = o.weights_x;
    if (given("--weights-z")) config.weights_z = o.weights_z;
    if (!o.prior_file.empty()) config.decoder_prior = NoiseParams::from_json(read_json_file(o.prior_file));
    if (!o.budget_file.empty()) config.budget = LatencyBudget::from_json(read_json_file(o.budget_file));

    std::vector<DecoderKind> decoders;
    const std::string dec_text =
        given("--decoder") ? o.decoders : (base.contains("decoders") ? std::string() : decoder_name(config.decoder));
    if (!dec_text.empty()) {
        for (const auto& d : split(dec_text, ',')) decoders.push_back(parse_decoder(d));
    } else {
        for (const auto& d : base.at("decoders")) decoders.push_back(parse_decoder(d.get<std::string>()));
    }
    if (decoders.empty()) throw UsageError("--decoder must name at least one decoder");

    NoiseParams noise = base.contains("noise") ? NoiseParams::from_json(base.at("noise")) : NoiseParams{};
    if (!o.noise_file.empty()) noise = NoiseParams::from_json(read_json_file(o.noise_file));
    auto injections = base.contains("injections") ? injections_from_json(base.at("injections")) : std::vector<InjectionSpec>{};
    if (given("--inject")) injections = parse_injections(o.inject);
    const uint64_t shots = given("--shots") ? o.shots : base.value("shots", o.shots);
    const uint64_t seed = given("--seed") ? o.seed : (base.contains("seed") ? base.at("seed").get<uint64_t>() : fresh_seed());
    const unsigned workers = o.workers ? o.workers : default_workers();
    std::vector<std::string> datasets = base.value("datasets", std::vector<std::string>{});
    if (given("--dataset")) datasets = o.datasets;
    if (shots == 0) throw UsageError("--shots must be at least 1");

    std::vector<DecoderResult> results;
    FeasibilityReport feasibility;
    BacklogReport backlog;
    if (datasets.empty()) {
        for (DecoderKind k : decoders) {
            LoopConfig c = config;
            c.decoder = k;
            if (k == DecoderKind::None) c.final_pfu = false;
            try {
                c.validate();
                validate_experiment(build_layout(c.distance), c.rounds, noise, injections);
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            auto r = run(c, noise, injections, shots, seed, workers);
            results.push_back({k, r.points, r.fit});
            feasibility = r.feasibility;
            backlog = r.backlog;
        }
    } else {
        std::map<DecoderKind, std::vector<RoundPoint>> points;
        for (const auto& path : datasets) {
            DatasetHeader header;
            const auto records = import_dataset(path, &header);
            LoopConfig c = config;
            if (given("--distance") && c.distance != header.distance) {
                throw UsageError(path + ": dataset distance " + std::to_string(header.distance) + " conflicts with --distance");
            }
            if ((given("--basis") || given("--state")) && c.basis != header.basis) {
                throw UsageError(path + ": dataset basis conflicts with --basis/--state");
            }
            c.distance = header.distance;
            c.basis = header.basis;
            c.prepared_sign = +1;
            c.rounds = header.rounds;
            c.round_values.clear();
            const NoiseParams prior = config.decoder_prior.value_or(
                header.metadata.contains("noise") ? NoiseParams::from_json(header.metadata.at("noise")) : NoiseParams{});
            const auto inj = header.metadata.contains("injections") ? injections_from_json(header.metadata.at("injections"))
                                                                    : std::vector<InjectionSpec>{};
            for (DecoderKind k : decoders) {
                c.decoder = k;
                c.final_pfu = k != DecoderKind::None;
                try {
                    c.validate();
                } catch (const std::invalid_argument& e) {
                    throw UsageError(e.what());
                }
                points[k].push_back(replay_shots(c, prior, inj, records, workers));
            }
            config.distance = header.distance;
            config.basis = header.basis;
        }
        for (DecoderKind k : decoders) {
            auto& pts = points[k];
            std::sort(pts.begin(), pts.end(), [](const RoundPoint& a, const RoundPoint& b) { return a.n < b.n; });
            results.push_back({k, pts, fit_points(pts)});
        }
        feasibility = check_feasibility(config, config.budget);
        backlog = check_throughput(config);
    }

    const std::string csv = results_csv(results);
    nlohmann::json outputs = nlohmann::json::object();
    if (!o.out_csv.empty()) {
        write_file(o.out_csv, csv);
        outputs["csv"] = o.out_csv;
    }
    std::vector<PlotSeries> series;
    for (const auto& r : results) series.push_back({decoder_name(r.kind), r.points});
    if (!o.plot.empty()) {
        write_file(o.plot, fidelity_svg(series));
        outputs["plot"] = o.plot;
    }

    nlohmann::json dec_names = nlohmann::json::array();
    for (auto k : decoders) dec_names.push_back(decoder_name(k));
    nlohmann::json config_echo = {{"loop", config.to_json()},
                                  {"decoders", dec_names},
                                  {"noise", noise.to_json()},
                                  {"injections", injections_json(injections)},
                                  {"shots", shots},
                                  {"seed", seed},
                                  {"datasets", datasets},
                                  {"workers", workers}};
    std::string manifest_path = o.manifest;
    if (manifest_path.empty() && !o.out_csv.empty()) manifest_path = o.out_csv + ".manifest.json";
    if (!manifest_path.empty()) outputs["manifest"] = manifest_path;

    nlohmann::json res_json = nlohmann::json::array();
    for (const auto& r : results) {
        ExperimentResult er;
        er.points = r.points;
        nlohmann::json pts = er.to_json().at("points");
        res_json.push_back({{"decoder", decoder_name(r.kind)}, {"points", pts}, {"fit", r.fit.to_json()}});
    }
    if (!o.out_json.empty()) outputs["json"] = o.out_json;
    const auto m = manifest("evaluate", args, config_echo, outputs, seconds_since(t0));
    const nlohmann::json summary = {{"ok", true},
                                    {"results", res_json},
                                    {"feasibility", feasibility.to_json()},
                                    {"backlog", backlog.to_json()},
                                    {"manifest", m}};
    if (!manifest_path.empty()) write_file(manifest_path, m.dump(2) + "\n");
    if (!o.out_json.empty()) write_file(o.out_json, summary.dump(2) + "\n");

    if (o.json) {
        out << summary.dump(2) << "\n";
        return kExitOk;
    }
    std::ostream& text = o.out_csv.empty() ? err : out;
    if (o.out_csv.empty()) out << csv;
    // Side-by-side fidelity table.
    text << "n";
    for (const auto& r : results) text << "\tF[" << decoder_name(r.kind) << "]";
    text << "\n";
    for (size_t i = 0; i < results[0].points.size(); ++i) {
        text << results[0].points[i].n;
        for (const auto& r : results) {
            char cell[48];
            std::snprintf(cell, sizeof cell, "\t%.4f(%.4f)", r.points[i].fidelity(), r.points[i].fidelity_err());
            text << cell;
        }
        text << "\n";
    }
    for (const auto& r : results) {
        char line[160];
        if (r.fit.valid) {
            std::snprintf(line, sizeof line, "%s: logical error per round %.4f +- %.4f", decoder_name(r.kind),
                          r.fit.epsilon, r.fit.epsilon_err);
        } else {
            std::snprintf(line, sizeof line, "%s: no fit (%s)", decoder_name(r.kind), r.fit.warning.c_str());
        }
        text << line << "\n";
    }
    text << "feedback " << (feasibility.feasible ? "feasible" : "INFEASIBLE") << " (delay " << config.delay_ns
         << " ns, required " << feasibility.required_ns << " ns); decoder backlog "
         << (backlog.zero_backlog ? "none" : std::to_string(backlog.backlog_per_round_ns) + " ns per round") << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- scale

struct ScaleOpts {
    std::string distances;
    std::string format = "csv";
    uint64_t capacity = kReferenceDsp;
    std::string manifest;
    bool json = false;
};

int cmd_scale(CLI::App& app, const ScaleOpts& o, const std::vector<std::string>& args, std::ostream& out) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<int> ds;
    if (o.distances.empty()) {
        ds = default_distances();
    } else {
        for (uint32_t d : parse_uint_list(o.distances, "--distances")) ds.push_back(static_cast<int>(d));
    }
    std::vector<ScalingRow> rows;
    for (int d : ds) {
        try {
            rows.push_back(project(d));
        } catch (const std::invalid_argument& e) {
            throw UsageError(std::string("--distances: ") + e.what());
        }
    }
    const auto cap = max_supported_distance(o.capacity);
    const nlohmann::json config = {{"distances", ds}, {"format", o.format}, {"capacity", o.capacity}};
    nlohmann::json outputs = nlohmann::json::object();
    if (!o.manifest.empty()) outputs["manifest"] = o.manifest;
    const auto m = manifest("scale", args, config, outputs, seconds_since(t0));
    if (!o.manifest.empty()) write_file(o.manifest, m.dump(2) + "\n");
    if (o.json) {
        nlohmann::json r = nlohmann::json::array();
        for (const auto& row : rows) r.push_back(row.to_json());
        out << nlohmann::json({{"ok", true}, {"rows", r}, {"max_supported_distance", cap.to_json()}, {"manifest", m}})
                   .dump(2)
            << "\n";
        return kExitOk;
    }
    if (o.format == "md") {
        out << scaling_markdown(rows);
        auto show = [](const std::optional<int>& d) { return d ? "d=" + std::to_string(*d) : std::string("none"); };
        out << "\nLargest distance within " << o.capacity << " DSP slices: " << show(cap.single)
            << " with one decoder, " << show(cap.dual) << " with an X and a Z decoder.\n";
    } else {
        out << scaling_csv(rows);
    }
    (void)app;
    return kExitOk;
}

// ---------------------------------------------------------------- budget

struct BudgetOpts {
    uint32_t delay_ns = 550;
    uint32_t cycle_ns = 1250;
    std::string budget_file;
    std::vector<std::string> set;
    std::string manifest;
    bool json = false;
};

int cmd_budget(CLI::App& app, const BudgetOpts& o, const std::vector<std::string>& args, std::ostream& out) {
    const auto t0 = std::chrono::steady_clock::now();
    nlohmann::json bj = o.budget_file.empty() ? nlohmann::json::object() : read_json_file(o.budget_file);
    for (const auto& kv : o.set) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw UsageError("--set expects key=value (got '" + kv + "')");
        const std::string key = kv.substr(0, eq);
        try {
            size_t used = 0;
            const long v = std::stol(kv.substr(eq + 1), &used);
            if (used != kv.size() - eq - 1 || v < 0) throw std::invalid_argument(kv);
            bj[key] = v;
        } catch (const std::exception&) {
            throw UsageError("--set " + kv + ": value must be a non-negative integer");
        }
    }
    LatencyBudget budget;
    try {
        budget = LatencyBudget::from_json(bj);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    LoopConfig c;
    c.rounds = 1;
    c.delay_ns = o.delay_ns;
    c.qec_cycle_ns = o.cycle_ns;
    c.budget = budget;
    const auto feas = check_feasibility(c, budget);
    const auto backlog = check_throughput(c);
    const nlohmann::json config = {{"delay_ns", o.delay_ns}, {"qec_cycle_ns", o.cycle_ns}, {"budget", budget.to_json()}};
    nlohmann::json outputs = nlohmann::json::object();
    if (!o.manifest.empty()) outputs["manifest"] = o.manifest;
    const auto m = manifest("budget", args, config, outputs, seconds_since(t0));
    if (!o.manifest.empty()) write_file(o.manifest, m.dump(2) + "\n");
    if (o.json) {
        out << nlohmann::json({{"ok", true},
                               {"budget", budget.to_json()},
                               {"decoder_subtotal_ns", budget.decoder_subtotal()},
                               {"electronics_subtotal_ns", budget.electronics_subtotal()},
                               {"total_ns", budget.total()},
                               {"delay_ns", o.delay_ns},
                               {"feasible", feas.slack_ns >= 0},
                               {"slack_ns", feas.slack_ns},
                               {"backlog", backlog.to_json()},
                               {"manifest", m}})
                   .dump(2)
            << "\n";
        return kExitOk;
    }
    char line[128];
    auto row = [&](const char* name, uint32_t v) {
        std::snprintf(line, sizeof line, "  %-22s %5u ns\n", name, v);
        out << line;
    };
    row("DAQ sampling", budget.daq_sampling_ns);
    out << "Decoder\n";
    row("syndrome", budget.syndrome_ns);
    row("NN core", budget.nn_core_ns);
    row("PFU", budget.pfu_ns);
    row("subtotal", budget.decoder_subtotal());
    out << "Electronics\n";
    row("ADC", budget.adc_ns);
    row("demodulation", budget.demod_ns);
    row("classification", budget.classify_ns);
    row("communication", budget.comm_ns);
    row("backplane", budget.backplane_ns);
    row("trigger", budget.trigger_ns);
    row("waveform generation", budget.wavegen_ns);
    row("DAC", budget.dac_ns);
    row("subtotal", budget.electronics_subtotal());
    row("Total", budget.total());
    std::snprintf(line, sizeof line, "delay %u ns: %s (slack %lld ns)\n", o.delay_ns,
                  feas.slack_ns >= 0 ? "feasible" : "INFEASIBLE", static_cast<long long>(feas.slack_ns));
    out << line;
    std::snprintf(line, sizeof line, "cycle %u ns: %s\n", o.cycle_ns,
                  backlog.zero_backlog ? "no decoder backlog"
                                       : ("backlog grows " + std::to_string(backlog.backlog_per_round_ns) +
                                          " ns per round")
                                             .c_str());
    out << line;
    (void)app;
    return kExitOk;
}

const char* kEvaluateFooter = R"(CSV schema: n,F,err,P,shots,successes (one decoder) or
decoder,n,F,err,P,shots,successes (several). F = 2P - 1 is the logical
fidelity after n rounds and err its binomial standard error.
Config files mirror LoopConfig: distance, rounds, round_values,
feedback_period, feedback, delay_ns, qec_cycle_ns, decoder, final_pfu, state,
basis, weights_x, weights_z, budget, decoder_prior. A run manifest can be
passed instead to replay a run.)";

}  // namespace

std::string fidelity_svg(const std::vector<PlotSeries>& series) {
    const double w = 640, h = 400, left = 60, right = 120, top = 20, bottom = 50;
    uint32_t max_n = 1;
    double lo = 1.0;
    for (const auto& s : series) {
        for (const auto& p : s.points) {
            max_n = std::max(max_n, p.n);
            lo = std::min(lo, p.fidelity() - p.fidelity_err());
        }
    }
    lo = std::max(-1.0, std::floor(lo * 10.0) / 10.0);
    if (lo >= 1.0) lo = 0.9;
    auto px = [&](double n) { return left + (w - left - right) * n / max_n; };
    auto py = [&](double f) { return top + (h - top - bottom) * (1.0 - f) / (1.0 - lo); };
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
    std::ostringstream svg;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" font-family=\"sans-serif\" "
                  "font-size=\"12\">\n",
                  w, h);
    svg << buf;
    std::snprintf(buf, sizeof buf, "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"none\" stroke=\"black\"/>\n",
                  left, top, w - left - right, h - top - bottom);
    svg << buf;
    for (int i = 0; i <= 5; ++i) {
        const double f = lo + (1.0 - lo) * i / 5.0;
        std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\">%.2f</text>\n", left - 6,
                      py(f) + 4, f);
        svg << buf;
    }
    const uint32_t step = std::max<uint32_t>(1, max_n / 10);
    for (uint32_t n = 0; n <= max_n; n += step) {
        std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">%u</text>\n", px(n),
                      h - bottom + 16, n);
        svg << buf;
    }
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">rounds n</text>\n",
                  (left + w - right) / 2, h - 10);
    svg << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"14\" y=\"%.1f\" text-anchor=\"middle\" transform=\"rotate(-90 14 %.1f)\">logical fidelity F</text>\n",
                  (top + h - bottom) / 2, (top + h - bottom) / 2);
    svg << buf;
    for (size_t s = 0; s < series.size(); ++s) {
        const char* c = colors[s % 4];
        svg << "<polyline fill=\"none\" stroke=\"" << c << "\" points=\"";
        for (const auto& p : series[s].points) {
            std::snprintf(buf, sizeof buf, "%.1f,%.1f ", px(p.n), py(p.fidelity()));
            svg << buf;
        }
        svg << "\"/>\n";
        for (const auto& p : series[s].points) {
            std::snprintf(buf, sizeof buf,
                          "<line x1=\"%.1f\" x2=\"%.1f\" y1=\"%.1f\" y2=\"%.1f\" stroke=\"%s\"/><circle cx=\"%.1f\" "
                          "cy=\"%.1f\" r=\"3\" fill=\"%s\"/>\n",
                          px(p.n), px(p.n), py(p.fidelity() - p.fidelity_err()), py(p.fidelity() + p.fidelity_err()), c,
                          px(p.n), py(p.fidelity()), c);
            svg << buf;
        }
        std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" fill=\"%s\">%s</text>\n", w - right + 10,
                      top + 16 + 18.0 * s, c, series[s].label.c_str());
        svg << buf;
    }
    svg << "</svg>\n";
    return svg.str();
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Real-time surface-code QEC loop: simulation, decoding, feedback and resource models", "qecrt"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    SimulateOpts so;
    auto* sim = app.add_subcommand("simulate", "Sample memory-experiment shots into a QECDS1 dataset");
    sim->add_option("--config", so.config, "Run manifest of an earlier simulate run to replay");
    sim->add_option("--distance,-d", so.distance, "Code distance (odd, >= 3)");
    sim->add_option("--rounds,-r", so.rounds, "Stabilizer rounds per shot");
    sim->add_option("--basis", so.basis, "Preparation and readout basis: Z or X");
    sim->add_option("--state", so.state, "Prepared state: 0 or + (sets the basis)");
    sim->add_option("--shots,-n", so.shots, "Number of shots");
    sim->add_option("--seed", so.seed, "Master seed; a fresh one is drawn and recorded when absent");
    sim->add_option("--noise-file", so.noise_file, "JSON with p1, p2, p_idle, p_meas")->check(CLI::ExistingFile);
    sim->add_option("--inject", so.inject, "Rotation, e.g. D2:X:40deg:each-round or D9:Z:30:round-3 (repeatable)");
    sim->add_option("--out,-o", so.out, "Dataset path");
    sim->add_option("--defects", so.defects, "Also write the QECDF1 defect export here");
    sim->add_option("--manifest", so.manifest, "Manifest path (default: <out>.manifest.json)");
    sim->add_option("--workers,-j", so.workers, "Worker threads (default: all cores); outputs do not depend on it");
    sim->add_flag("--json", so.json, "Print a JSON summary on stdout");

    EvaluateOpts eo;
    auto* ev = app.add_subcommand("evaluate", "Run the closed loop (or decode datasets) and report F(n)");
    ev->add_option("--config,-c", eo.config, "LoopConfig JSON or a run manifest to replay")->check(CLI::ExistingFile);
    ev->add_option("--dataset", eo.datasets, "Decode recorded QECDS1 datasets instead of simulating (repeatable)")
        ->check(CLI::ExistingFile);
    ev->add_option("--decoder", eo.decoders, "none, nn or mwpm; a comma list gives a side-by-side table");
    ev->add_option("--distance,-d", eo.distance, "Code distance");
    ev->add_option("--rounds,-r", eo.rounds, "Largest n; every n in 1..rounds is evaluated");
    ev->add_option("--round-values", eo.round_values, "Comma list of n to evaluate instead");
    ev->add_option("--feedback-period,-m", eo.feedback_period, "Feedback every m rounds (0: after the last round)");
    ev->add_flag("--no-feedback", eo.no_feedback, "Track the Pauli frame only; no pulses");
    ev->add_option("--delay", eo.delay_ns, "Delay after each readout in ns");
    ev->add_option("--cycle", eo.cycle_ns, "QEC cycle in ns");
    ev->add_flag("--final-pfu", eo.final_pfu, "Apply the frame and the final-round verdict to the readout");
    ev->add_option("--basis", eo.basis, "Z or X");
    ev->add_option("--state", eo.state, "0, 1, + or -");
    ev->add_option("--weights-x", eo.weights_x, "QECNW1 weights of the X-type decoder (nn)")->check(CLI::ExistingFile);
    ev->add_option("--weights-z", eo.weights_z, "QECNW1 weights of the Z-type decoder (nn)")->check(CLI::ExistingFile);
    ev->add_option("--noise-file", eo.noise_file, "Simulation noise JSON")->check(CLI::ExistingFile);
    ev->add_option("--prior-file", eo.prior_file, "MWPM edge-weight noise JSON (default: the simulation noise)")
        ->check(CLI::ExistingFile);
    ev->add_option("--budget-file", eo.budget_file, "Latency budget JSON")->check(CLI::ExistingFile);
    ev->add_option("--inject", eo.inject, "Rotation spec (repeatable)");
    ev->add_option("--shots,-n", eo.shots, "Shots per n");
    ev->add_option("--seed", eo.seed, "Master seed");
    ev->add_option("--workers,-j", eo.workers, "Worker threads; outputs do not depend on it");
    ev->add_option("--out-csv", eo.out_csv, "CSV output path");
    ev->add_option("--out-json", eo.out_json, "JSON summary path");
    ev->add_option("--plot", eo.plot, "SVG plot of F(n)");
    ev->add_option("--manifest", eo.manifest, "Manifest path (default: <out-csv>.manifest.json)");
    ev->add_flag("--json", eo.json, "Print the JSON summary on stdout");
    ev->footer(kEvaluateFooter);

    ScaleOpts sc;
    auto* scale = app.add_subcommand("scale", "Project decoder resources versus code distance");
    scale->add_option("--distances", sc.distances, "Comma list of odd distances (default 3,5,...,17)");
    scale->add_option("--format", sc.format, "csv or md")->check(CLI::IsMember({"csv", "md"}));
    scale->add_option("--capacity", sc.capacity, "DSP slices available for the supported-distance reading");
    scale->add_option("--manifest", sc.manifest, "Manifest path");
    scale->add_flag("--json", sc.json, "Print JSON on stdout");
    scale->footer("CSV schema: d,dim_x,h,p_lstm,dsp,utilization_pct,latency_ns");

    BudgetOpts bo;
    auto* budget = app.add_subcommand("budget", "Closed-loop latency budget and feasibility for a delay");
    budget->add_option("--delay", bo.delay_ns, "Delay after each readout in ns");
    budget->add_option("--cycle", bo.cycle_ns, "QEC cycle in ns for the decoder backlog check");
    budget->add_option("--budget-file", bo.budget_file, "Budget JSON overriding defaults")->check(CLI::ExistingFile);
    budget->add_option("--set", bo.set, "Override one entry, e.g. nn_core_ns=200 (repeatable)");
    budget->add_option("--manifest", bo.manifest, "Manifest path");
    budget->add_flag("--json", bo.json, "Print JSON on stdout");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }
    bool json = so.json || eo.json || sc.json || bo.json;
    try {
        if (*sim) return cmd_simulate(*sim, so, args, out);
        if (*ev) return cmd_evaluate(*ev, eo, args, out, err);
        if (*scale) return cmd_scale(*scale, sc, args, out);
        if (*budget) return cmd_budget(*budget, bo, args, out);
    } catch (const UsageError& e) {
        if (json) out << nlohmann::json({{"ok", false}, {"error", e.what()}}).dump(2) << "\n";
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        if (json) out << nlohmann::json({{"ok", false}, {"error", e.what()}}).dump(2) << "\n";
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        if (json) out << nlohmann::json({{"ok", false}, {"error", e.what()}}).dump(2) << "\n";
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}

}  // namespace rtqec::cli

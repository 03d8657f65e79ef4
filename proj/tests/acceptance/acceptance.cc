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

// Acceptance harness: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Run with --only <name> to select a single criterion.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cli.h"
#include "oracles/lstm_oracle.h"
#include "oracles/pairing.h"
#include "rtqec/code_model.h"
#include "rtqec/feedback.h"
#include "rtqec/mwpm.h"
#include "rtqec/noise_sim.h"
#include "rtqec/qlstm.h"
#include "rtqec/realtime_loop.h"
#include "rtqec/scaling_estimator.h"
#include "rtqec/syndrome.h"

using namespace rtqec;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;
};

// Accumulates failures; the first few are kept for the report.
class Checker {
   public:
    void expect(bool ok, const std::string& what) {
        ++checks_;
        if (ok) return;
        ++failures_;
        if (failures_ <= 6) notes_.push_back(what);
    }
    void note(const std::string& s) {
        info_.push_back(s);
    }
    Verdict verdict() const {
        std::ostringstream os;
        os << checks_ << " checks";
        for (const auto& s : info_) os << "; " << s;
        if (failures_) {
            os << "; " << failures_ << " failed:";
            for (const auto& s : notes_) os << " [" << s << "]";
        }
        return {failures_ == 0, os.str()};
    }

   private:
    uint64_t checks_ = 0, failures_ = 0;
    std::vector<std::string> notes_, info_;
};

std::string fmt(double v, int prec = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

unsigned workers() {
    return std::max(1u, std::thread::hardware_concurrency());
}

int cli(const std::vector<std::string>& args, std::string* out = nullptr) {
    std::ostringstream o, e;
    const int code = cli::run_cli(args, o, e);
    if (out) *out = o.str();
    return code;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, sep);) out.push_back(item);
    return out;
}

// ---------------------------------------------------------------------------

Verdict scaling_table() {
    struct Row {
        int d;
        long p_lstm;
        long dsp;
        long latency;
    };
    const std::vector<Row> published = {
        {3, 4736, 399, 124},      {5, 13992, 1094, 205},    {7, 29700, 2191, 291},    {9, 52224, 3591, 372},
        {11, 83304, 5337, 453},   {13, 123212, 7533, 538},  {15, 172160, 9975, 620},  {17, 230364, 12757, 701},
    };
    Checker c;
    std::string csv;
    c.expect(cli({"scale", "--format", "csv"}, &csv) == cli::kExitOk, "qecrt scale exit code");
    auto lines = split(csv, '\n');
    c.expect(lines.size() == published.size() + 1, "row count " + std::to_string(lines.size()));
    for (size_t i = 0; i < published.size() && i + 1 < lines.size(); ++i) {
        // d,dim_x,h,p_lstm,dsp,utilization_pct,latency_ns
        auto f = split(lines[i + 1], ',');
        const auto& want = published[i];
        const std::string d = "d=" + std::to_string(want.d);
        c.expect(std::stoi(f[0]) == want.d, d + " order");
        c.expect(std::stol(f[3]) == want.p_lstm, d + " P_LSTM " + f[3] + " vs " + std::to_string(want.p_lstm));
        c.expect(std::labs(std::stol(f[4]) - want.dsp) <= 10, d + " DSP " + f[4] + " vs " + std::to_string(want.dsp));
        c.expect(std::labs(std::stol(f[6]) - want.latency) <= 1,
                 d + " latency " + f[6] + " vs " + std::to_string(want.latency));
    }
    return c.verdict();
}

Verdict latency_budget() {
    Checker c;
    const LatencyBudget b;
    c.expect(b.decoder_subtotal() == 148, "decoder subtotal " + std::to_string(b.decoder_subtotal()));
    c.expect(b.electronics_subtotal() == 180, "electronics subtotal " + std::to_string(b.electronics_subtotal()));
    c.expect(b.total() == 550, "total " + std::to_string(b.total()));
    LoopConfig cfg;
    cfg.delay_ns = 549;
    c.expect(!check_feasibility(cfg, b).feasible, "549 ns should be infeasible");
    cfg.delay_ns = 550;
    c.expect(check_feasibility(cfg, b).feasible, "550 ns should be feasible");
    // Same verdicts through the command line.
    for (auto [delay, want] : {std::pair{"549", false}, std::pair{"550", true}}) {
        std::string out;
        c.expect(cli({"budget", "--delay", delay, "--json"}, &out) == cli::kExitOk, "qecrt budget exit code");
        auto j = nlohmann::json::parse(out);
        c.expect(j["feasible"] == want, std::string("qecrt budget --delay ") + delay);
        c.expect(j["total_ns"] == 550, "qecrt budget total");
    }
    return c.verdict();
}

// Closed form of the double XOR chain for a single ancilla with a_0 = 0:
// x_n = a_n ^ a_{n-2}, except x_1 = 0 on the type not fixed by preparation.
uint8_t chain_defect(const std::vector<uint8_t>& a, uint32_t n, bool prepared) {
    auto at = [&](int k) -> uint8_t { return k >= 1 ? a[k - 1] : 0; };
    if (n == 1 && !prepared) return 0;
    return at(int(n)) ^ at(int(n) - 2);
}

Verdict syndrome_algebra() {
    Checker c;
    CodeLayout l(3);
    for (Basis basis : {Basis::Z, Basis::X}) {
        for (uint32_t anc = 0; anc < l.num_ancillas(); ++anc) {
            const auto type = l.ancilla(anc).type;
            const bool prepared = type == measured_type(basis);
            const size_t pos = l.position_in_type(anc);
            for (int pattern = 0; pattern < 8; ++pattern) {
                std::vector<uint8_t> a = {uint8_t(pattern & 1), uint8_t(pattern >> 1 & 1), uint8_t(pattern >> 2 & 1)};
                SyndromeStream s(l, basis);
                for (uint32_t n = 1; n <= 3; ++n) {
                    std::vector<uint8_t> bits(l.num_ancillas(), 0);
                    bits[anc] = a[n - 1];
                    auto d = s.push(bits);
                    for (auto t : {StabilizerType::Z, StabilizerType::X}) {
                        for (size_t i = 0; i < d.of(t).size(); ++i) {
                            const uint8_t want = (t == type && i == pos) ? chain_defect(a, n, prepared) : 0;
                            c.expect(d.of(t)[i] == want, "basis " + std::string(1, basis_char(basis)) + " ancilla " +
                                                             std::to_string(anc) + " pattern " +
                                                             std::to_string(pattern) + " round " + std::to_string(n));
                        }
                    }
                }
            }
        }
    }
    // Final stabilizer of A2 from the data readout, over all 2^9 patterns.
    {
        auto [z, x] = init_frames(l, Basis::Z, std::vector<uint8_t>(l.num_ancillas(), 0));
        for (int mask = 0; mask < 512; ++mask) {
            std::vector<uint8_t> d(9);
            for (int q = 0; q < 9; ++q) d[q] = mask >> q & 1;
            auto f = finalize(z, d, Basis::Z);
            c.expect(f.stabilizer_values[0] == (d[0] ^ d[1] ^ d[3] ^ d[4]), "A2 final mask " + std::to_string(mask));
        }
    }
    // Noiseless closed loop: every frame the planner can see produces its
    // pulses after every round, and cancellations leave no net defects.
    const uint32_t rounds = 5;
    for (Basis basis : {Basis::Z, Basis::X}) {
        for (PauliFrame frame : {PauliFrame{-1, 1}, PauliFrame{1, -1}, PauliFrame{-1, -1}}) {
            for (uint32_t after = 1; after <= rounds; ++after) {
                FrameSimulator sim(l, basis, NoiseParams::noiseless(), {});
                sim.begin_shot(after);
                SyndromeStream s(l, basis);
                std::vector<CancellationInstruction> pending;
                size_t pulses = 0;
                for (uint32_t n = 1; n <= rounds; ++n) {
                    auto d = s.push(sim.run_round(), pending);
                    c.expect(std::count(d.z.begin(), d.z.end(), 1) + std::count(d.x.begin(), d.x.end(), 1) == 0,
                             "defect in noiseless loop round " + std::to_string(n));
                    if (n == after) {
                        auto [plan, restored] = plan_feedback(frame, l, n + 1);
                        c.expect(restored.identity(), "planner leaves the frame signed");
                        for (const auto& p : plan.pulses) sim.apply_correction(p.data, p.gate);
                        pending.insert(pending.end(), plan.cancellations.begin(), plan.cancellations.end());
                        pulses += plan.pulses.size();
                    }
                }
                auto f = s.finalize(sim.measure_data(), pending);
                c.expect(std::count(f.defects.begin(), f.defects.end(), 1) == 0, "final defects after pulse");
                c.expect(pulses == size_t(frame.sign_x < 0) + size_t(frame.sign_z < 0), "pulse count");
            }
        }
    }
    return c.verdict();
}

Verdict mwpm_exactness() {
    Checker c;
    CodeLayout l(3);
    {
        auto g = build_graph(l, Basis::Z, 3, NoiseParams{});
        std::vector<oracle::WeightedEdge> edges;
        for (const auto& e : g.edges()) edges.push_back({e.u, e.v, e.weight, e.logical});
        oracle::Distances dist(g.num_nodes(), edges);
        const uint32_t n = g.num_detectors();
        uint64_t configs = 0;
        for (uint32_t mask = 0; mask < (1u << n); ++mask) {
            if (std::popcount(mask) > 8) continue;
            std::vector<uint32_t> d;
            for (uint32_t i = 0; i < n; ++i) {
                if (mask >> i & 1) d.push_back(i);
            }
            auto m = decode(g, d);
            auto o = oracle::PairingEnumerator(dist, d, g.boundary()).run();
            c.expect(m.total_weight == o.weight, "weight mismatch mask " + std::to_string(mask));
            ++configs;
        }
        c.note(std::to_string(configs) + " configurations on " + std::to_string(n) + " detectors");
    }
    // Every elementary fault of the circuit, injected alone.
    uint64_t faults = 0;
    for (Basis b : {Basis::Z, Basis::X}) {
        const uint32_t rounds = 3;
        auto g = build_graph(l, b, rounds, NoiseParams{});
        FrameSimulator sim(l, b, NoiseParams{}, {});
        sim.begin_enumeration();
        for (uint32_t r = 0; r < rounds; ++r) sim.run_round();
        sim.measure_data();
        const auto sites = sim.sites();
        for (size_t s = 0; s < sites.size(); ++s) {
            for (uint32_t comp = 1; comp <= component_count(sites[s].kind); ++comp) {
                ShotRecord rec;
                rec.distance = 3;
                rec.rounds = rounds;
                rec.basis = b;
                sim.begin_probe(ForcedFault{s, comp});
                for (uint32_t r = 0; r < rounds; ++r) {
                    auto bits = sim.run_round();
                    rec.ancilla_bits.insert(rec.ancilla_bits.end(), bits.begin(), bits.end());
                }
                rec.data_bits = sim.measure_data();
                auto m = decode(g, detector_nodes(g, compute_defects(l, rec)));
                const bool residual = m.logical_flip != raw_logical_parity(l, b, rec.data_bits);
                c.expect(!residual, "residual flip basis " + std::string(1, basis_char(b)) + " site " +
                                        std::to_string(s) + " component " + std::to_string(comp));
                ++faults;
            }
        }
    }
    c.note(std::to_string(faults) + " single faults");
    return c.verdict();
}

Verdict fixed_point_fidelity() {
    Checker c;
    std::mt19937_64 rng(20260601);
    std::bernoulli_distribution bit(0.3);
    double worst = 0.0;
    uint64_t sets_within = 0, rounds_within = 0, rounds_total = 0;
    const int sets = 1000, rounds = 20;
    for (int t = 0; t < sets; ++t) {
        auto w = QLstmWeights::random(4, 32, StabilizerType::Z, rng);
        auto o = oracle::LstmCell::from(w);
        auto s = DecoderState::zeros(32);
        double set_worst = 0.0;
        for (int n = 0; n < rounds; ++n) {
            std::vector<uint8_t> x(4);
            for (auto& e : x) e = bit(rng);
            auto [next, v] = step(s, x, w);
            const double err = std::abs(v.y_value() - o.step(x));
            set_worst = std::max(set_worst, err);
            rounds_within += err <= 1.0 / 16;
            ++rounds_total;
            s = next;
        }
        worst = std::max(worst, set_worst);
        sets_within += set_worst <= 1.0 / 16;
        c.expect(set_worst <= 1.0 / 16, "set " + std::to_string(t) + " error " + fmt(set_worst));
    }
    c.note("worst |y_fixed - y_float| " + fmt(worst) + ", sets within 1/16: " + std::to_string(sets_within) + "/" +
           std::to_string(sets) + ", rounds within: " + std::to_string(rounds_within) + "/" +
           std::to_string(rounds_total));

    // Saturation under fuzzed weight files: extreme values, odd shapes, any
    // binary point, round-tripped through the file codec.
    for (int t = 0; t < 300; ++t) {
        const uint16_t in = 1 + rng() % 12, hid = 1 + rng() % 48;
        auto w = QLstmWeights::zeros(in, hid, StabilizerType::X, static_cast<uint8_t>(rng() % 9));
        auto pick = [&]() -> int8_t {
            switch (rng() % 3) {
                case 0: return kWeightMin;
                case 1: return kWeightMax;
                default: return static_cast<int8_t>(int(rng() % 64) - 32);
            }
        };
        for (int g = 0; g < 4; ++g) {
            for (auto& e : w.wx[g]) e = pick();
            for (auto& e : w.wh[g]) e = pick();
            for (auto& e : w.b[g]) e = pick();
        }
        for (auto& e : w.wd) e = pick();
        w.bd = pick();
        w = decode_weights(encode_weights(w));
        auto s = DecoderState::zeros(hid);
        StepTrace trace;
        bool ok = true;
        for (int n = 0; n < 25; ++n) {
            std::vector<uint8_t> x(in);
            for (auto& e : x) e = rng() & 1;
            auto [next, v] = step(s, x, w, &trace);
            for (int g = 0; g < 4; ++g) {
                for (int32_t a : trace.gates[g]) ok &= a >= 0 && a <= kActivationOne;
            }
            for (size_t j = 0; j < hid; ++j) {
                ok &= next.h[j] >= 0 && next.h[j] <= kActivationOne;
                ok &= next.c[j] >= 0 && next.c[j] <= kCellMax;
            }
            ok &= v.y >= 0 && v.y <= kActivationOne;
            s = next;
        }
        c.expect(ok, "saturation fuzz case " + std::to_string(t));
    }
    return c.verdict();
}

Verdict closed_loop_ordering() {
    Checker c;
    const uint64_t shots = 100000, seed = 424242;
    const NoiseParams noise;
    LoopConfig base;
    base.distance = 3;
    base.rounds = 10;

    LoopConfig uncorrected = base;
    uncorrected.decoder = DecoderKind::None;
    LoopConfig corrected = base;
    corrected.decoder = DecoderKind::Mwpm;
    corrected.final_pfu = true;
    corrected.feedback_period = 0;
    LoopConfig every_round = corrected;
    every_round.feedback_period = 1;

    const auto u = run(uncorrected, noise, {}, shots, seed, workers());
    const auto k = run(corrected, noise, {}, shots, seed + 1, workers());
    const auto m1 = run(every_round, noise, {}, shots, seed + 2, workers());
    double min_gap = 1e9;
    for (size_t i = 0; i < u.points.size(); ++i) {
        const auto& a = u.points[i];
        const auto& b = k.points[i];
        const double sigma = std::hypot(a.fidelity_err(), b.fidelity_err());
        const double gap = (b.fidelity() - a.fidelity()) / sigma;
        min_gap = std::min(min_gap, gap);
        c.expect(gap > 3.0, "n=" + std::to_string(a.n) + " corrected " + fmt(b.fidelity()) + " vs uncorrected " +
                                fmt(a.fidelity()) + " (" + fmt(gap, 3) + " sigma)");
    }
    const auto& last0 = k.points.back();
    const auto& last1 = m1.points.back();
    const double z = (last1.fidelity() - last0.fidelity()) / std::hypot(last0.fidelity_err(), last1.fidelity_err());
    c.expect(std::abs(z) <= 3.0, "m=1 vs final-only at n=10 differ by " + fmt(z, 3) + " sigma");
    c.note("min corrected-uncorrected gap " + fmt(min_gap, 3) + " sigma");
    c.note("F(10) none " + fmt(u.points.back().fidelity()) + ", final-only " + fmt(last0.fidelity()) + ", m=1 " +
           fmt(last1.fidelity()) + " (|z| " + fmt(std::abs(z), 3) + ")");
    c.note("eps none " + fmt(u.fit.epsilon) + ", final-only " + fmt(k.fit.epsilon) + ", m=1 " + fmt(m1.fit.epsilon));
    return c.verdict();
}

Verdict fit_recovery() {
    Checker c;
    for (double eps : {0.0, 0.01, 0.069, 0.2}) {
        std::vector<DecayPoint> pts;
        for (uint32_t n = 1; n <= 10; ++n) pts.push_back({n, std::pow(1 - 2 * eps, double(n)), 0.0});
        auto fit = fit_decay(pts);
        c.expect(fit.valid && std::abs(fit.epsilon - eps) <= 1e-12,
                 "exact eps " + fmt(eps) + " recovered " + fmt(fit.epsilon, 15));
    }
    // Noisy recovery: binomial success counts at 10^4 shots per n.
    const double eps = 0.03;
    const uint64_t shots = 10000;
    const int trials = 200;
    std::mt19937_64 rng(7031);
    int covered = 0;
    for (int t = 0; t < trials; ++t) {
        std::vector<DecayPoint> pts;
        for (uint32_t n = 1; n <= 10; ++n) {
            const double p = (1 + std::pow(1 - 2 * eps, double(n))) / 2;
            RoundPoint rp;
            rp.n = n;
            rp.shots = shots;
            rp.successes = std::binomial_distribution<uint64_t>(shots, p)(rng);
            pts.push_back({n, rp.fidelity(), rp.fidelity_err()});
        }
        auto fit = fit_decay(pts);
        covered += fit.valid && std::abs(fit.epsilon - eps) <= 2 * fit.epsilon_err;
    }
    c.note("noisy coverage " + std::to_string(covered) + "/" + std::to_string(trials) + " at eps " + fmt(eps));
    c.expect(covered >= 190, "coverage " + std::to_string(covered) + "/200 below 95%");
    return c.verdict();
}

Verdict determinism() {
    Checker c;
    const fs::path dir = fs::temp_directory_path() / "rtqec_acceptance_determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto p = [&](const std::string& name) { return (dir / name).string(); };
    for (const char* j : {"1", "8"}) {
        const std::string tag = j;
        c.expect(cli({"simulate", "-r", "8", "-n", "3000", "--seed", "77", "-j", j, "--inject", "D2:X:30",
                      "--out", p("mem" + tag + ".ds"), "--defects", p("mem" + tag + ".def")}) == cli::kExitOk,
                 "simulate -j " + tag);
        c.expect(cli({"evaluate", "-r", "6", "-n", "3000", "--seed", "78", "-j", j, "--decoder", "none,mwpm",
                      "--final-pfu", "-m", "2", "--out-csv", p("eval" + tag + ".csv")}) == cli::kExitOk,
                 "evaluate -j " + tag);
        c.expect(cli({"evaluate", "--dataset", p("mem1.ds"), "-j", j, "--decoder", "mwpm", "--out-csv",
                      p("replay" + tag + ".csv")}) == cli::kExitOk,
                 "evaluate --dataset -j " + tag);
    }
    for (const char* f : {"mem%.ds", "mem%.def", "eval%.csv", "replay%.csv"}) {
        std::string a = f, b = f;
        a.replace(a.find('%'), 1, "1");
        b.replace(b.find('%'), 1, "8");
        const std::string x = slurp(dir / a), y = slurp(dir / b);
        c.expect(!x.empty() && x == y, a + " and " + b + " differ");
    }
    fs::remove_all(dir);
    return c.verdict();
}

struct Criterion {
    const char* name;
    double limit_s;
    std::function<Verdict()> fn;
};

}  // namespace

int main(int argc, char** argv) {
    std::string only;
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--only") only = argv[i + 1];
    }
    const std::vector<Criterion> criteria = {
        {"scaling_table", 1, scaling_table},
        {"latency_budget", 1, latency_budget},
        {"syndrome_algebra", 10, syndrome_algebra},
        {"mwpm_exactness", 300, mwpm_exactness},
        {"fixed_point_fidelity", 60, fixed_point_fidelity},
        {"closed_loop_ordering", 600, closed_loop_ordering},
        {"fit_recovery", 60, fit_recovery},
        {"determinism", 0, determinism},
    };
    int failed = 0;
    for (const auto& cr : criteria) {
        if (!only.empty() && only != cr.name) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = cr.fn();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::string timing = fmt(s, 3) + " s";
        if (cr.limit_s > 0) {
            timing += " of " + fmt(cr.limit_s, 3) + " s";
            if (s > cr.limit_s) {
                v.pass = false;
                v.detail += "; over the runtime limit";
            }
        }
        failed += !v.pass;
        std::cout << (v.pass ? "PASS " : "FAIL ") << cr.name << " (" << timing << ") " << v.detail << std::endl;
    }
    return failed == 0 ? 0 : 1;
}

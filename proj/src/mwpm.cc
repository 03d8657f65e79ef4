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

#include "rtqec/mwpm.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>

namespace rtqec {

namespace {

constexpr int64_t kInf = std::numeric_limits<int64_t>::max();

// Parity sets: bit 0 = even reachable, bit 1 = odd reachable.
uint8_t shift_parity(uint8_t mask, bool odd) {
    return odd ? static_cast<uint8_t>(((mask & 1) << 1) | ((mask >> 1) & 1)) : mask;
}

uint8_t compose_parity(uint8_t a, uint8_t b) {
    const bool even = ((a & 1) && (b & 1)) || ((a & 2) && (b & 2));
    const bool odd = ((a & 1) && (b & 2)) || ((a & 2) && (b & 1));
    return static_cast<uint8_t>((even ? 1 : 0) | (odd ? 2 : 0));
}

int64_t add_sat(int64_t a, int64_t b) {
    if (a == kInf || b == kInf) return kInf;
    return a + b;
}

struct Signature {
    std::vector<uint32_t> nodes;
    bool logical = false;
};

Signature xor_signature(const Signature& a, const Signature& b) {
    Signature out;
    std::set_symmetric_difference(
        a.nodes.begin(), a.nodes.end(), b.nodes.begin(), b.nodes.end(), std::back_inserter(out.nodes));
    out.logical = a.logical != b.logical;
    return out;
}

class Prober {
   public:
    Prober(const CodeLayout& layout, Basis basis, const NoiseParams& noise, const std::vector<InjectionSpec>& injections,
           const DetectorGraph& graph, bool measure)
        : layout_(layout), basis_(basis), sim_(layout, basis, noise, injections), graph_(graph), measure_(measure) {
    }

    const std::vector<FaultSite>& enumerate() {
        sim_.begin_enumeration();
        for (uint32_t r = 0; r < graph_.rounds; ++r) sim_.run_round();
        if (measure_) sim_.measure_data();
        return sim_.sites();
    }

    Signature run(std::optional<ForcedFault> fault) {
        Signature sig;
        sim_.begin_probe(fault);
        SyndromeStream stream(layout_, basis_);
        for (uint32_t r = 1; r <= graph_.rounds; ++r) {
            auto bits = sim_.run_round();
            auto rd = stream.push(bits);
            append_round_nodes(graph_, r, rd.of(graph_.type), sig.nodes);
        }
        if (measure_) {
            auto data = sim_.measure_data();
            if (graph_.has_final) {
                auto ff = stream.finalize(data);
                append_round_nodes(graph_, graph_.rounds + 1, ff.defects, sig.nodes);
            }
        }
        sig.logical = graph_.type == StabilizerType::Z ? sim_.truth_x_flip() : sim_.truth_z_flip();
        std::sort(sig.nodes.begin(), sig.nodes.end());
        return sig;
    }

   private:
    const CodeLayout& layout_;
    Basis basis_;
    FrameSimulator sim_;
    const DetectorGraph& graph_;
    bool measure_;
};

}  // namespace

int64_t quantize_weight(double p) {
    if (!(p > 0.0)) {
        throw std::invalid_argument("edge probability must be positive");
    }
    if (p >= 0.5) return 0;
    return std::llround(std::log((1.0 - p) / p) * kWeightScale);
}

DetectorGraph::DetectorGraph(uint32_t num_detectors) : num_detectors_(num_detectors) {
}

void DetectorGraph::add_edge(uint32_t u, uint32_t v, double p, bool logical) {
    if (finalized_) {
        throw std::logic_error("graph already finalized");
    }
    if (u >= num_nodes() || v >= num_nodes() || u == v) {
        throw std::invalid_argument("bad edge endpoints");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("edge probability outside [0, 1]");
    }
    if (p == 0.0) return;
    if (u > v) std::swap(u, v);
    double& q = pending_[{u, v}].p[logical ? 1 : 0];
    q = q * (1.0 - p) + p * (1.0 - q);
}

void DetectorGraph::finalize() {
    if (finalized_) return;
    edges_.clear();
    for (const auto& [key, acc] : pending_) {
        if (acc.p[0] > 0.0 && acc.p[1] > 0.0) ++annotation_conflicts;
        const bool logical = acc.p[1] > acc.p[0];
        const double p = logical ? acc.p[1] : acc.p[0];
        edges_.push_back({key.first, key.second, p, quantize_weight(p), logical});
    }
    pending_.clear();

    const uint32_t n = num_nodes();
    std::vector<std::vector<std::pair<uint32_t, size_t>>> adj(n);
    for (size_t e = 0; e < edges_.size(); ++e) {
        adj[edges_[e].u].push_back({edges_[e].v, e});
        adj[edges_[e].v].push_back({edges_[e].u, e});
    }
    dist_.assign(static_cast<size_t>(n) * n, kInf);
    parity_mask_.assign(static_cast<size_t>(n) * n, 0);
    using Item = std::pair<int64_t, uint32_t>;
    for (uint32_t s = 0; s < n; ++s) {
        int64_t* dist = &dist_[static_cast<size_t>(s) * n];
        uint8_t* mask = &parity_mask_[static_cast<size_t>(s) * n];
        std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
        dist[s] = 0;
        mask[s] = 1;
        pq.push({0, s});
        while (!pq.empty()) {
            auto [d, u] = pq.top();
            pq.pop();
            if (d > dist[u]) continue;
            for (auto [v, e] : adj[u]) {
                const int64_t nd = d + edges_[e].weight;
                const uint8_t m = shift_parity(mask[u], edges_[e].logical);
                if (nd < dist[v]) {
                    dist[v] = nd;
                    mask[v] = m;
                    pq.push({nd, v});
                } else if (nd == dist[v] && (mask[v] | m) != mask[v]) {
                    // Re-expand so the wider parity set propagates.
                    mask[v] |= m;
                    pq.push({nd, v});
                }
            }
        }
    }
    edge_free = edges_.empty();
    finalized_ = true;
}

nlohmann::json DetectorGraph::to_json(const CodeLayout* layout) const {
    nlohmann::json nodes = nlohmann::json::array();
    for (uint32_t id = 0; id < num_detectors_; ++id) {
        nlohmann::json node = {{"id", id}};
        if (per_type > 0) {
            const uint32_t round = id / per_type + 1;
            const uint32_t pos = id % per_type;
            node["round"] = round;
            node["position"] = pos;
            if (layout) {
                node["stabilizer"] = CodeLayout::ancilla_label(layout->ancillas_of_type(type)[pos]);
            }
            node["final"] = has_final && round == rounds + 1;
        }
        nodes.push_back(std::move(node));
    }
    nodes.push_back({{"id", boundary()}, {"boundary", true}});
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : edges_) {
        edges.push_back({{"u", e.u}, {"v", e.v}, {"p", e.probability}, {"weight", e.weight / kWeightScale}, {"logical", e.logical}});
    }
    return {
        {"type", std::string(1, type_char(type))},
        {"basis", std::string(1, basis_char(basis))},
        {"rounds", rounds},
        {"has_final", has_final},
        {"detectors_per_round", per_type},
        {"num_detectors", num_detectors_},
        {"nodes", std::move(nodes)},
        {"edges", std::move(edges)},
        {"stats",
         {{"edge_free", edge_free},
          {"fault_components", fault_components},
          {"undetectable_logical", undetectable_logical},
          {"decomposed", decomposed},
          {"dropped_hyperedges", dropped_hyperedges},
          {"annotation_conflicts", annotation_conflicts}}},
    };
}

DetectorGraph build_graph(
    const CodeLayout& layout,
    Basis basis,
    uint32_t rounds,
    const NoiseParams& noise,
    StabilizerType type,
    const std::vector<InjectionSpec>& injections,
    GraphOptions options) {
    validate_experiment(layout, rounds, noise, injections);
    const uint32_t covered = options.rounds == 0 ? rounds : options.rounds;
    if (covered > rounds) {
        throw std::invalid_argument("graph cannot cover more rounds than the experiment");
    }
    const bool full = covered == rounds;
    const bool has_final = options.include_final && full && type == measured_type(basis);
    const uint32_t per_type = static_cast<uint32_t>(layout.stabilizers_per_type());

    DetectorGraph g(per_type * (covered + (has_final ? 1 : 0)));
    g.type = type;
    g.basis = basis;
    g.rounds = covered;
    g.has_final = has_final;
    g.per_type = per_type;

    // Final-measurement faults only matter through the final layer.
    Prober prober(layout, basis, noise, injections, g, has_final);
    const auto sites = prober.enumerate();
    if (!prober.run(std::nullopt).nodes.empty()) {
        throw std::logic_error("noiseless reference run produced defects");
    }

    auto add = [&](const Signature& sig, double p) {
        if (sig.nodes.size() == 1) {
            g.add_edge(sig.nodes[0], g.boundary(), p, sig.logical);
        } else {
            g.add_edge(sig.nodes[0], sig.nodes[1], p, sig.logical);
        }
    };

    for (size_t s = 0; s < sites.size(); ++s) {
        const FaultSite& site = sites[s];
        const uint32_t k = component_count(site.kind);
        const double p = component_probability(site);
        std::vector<Signature> sigs(k + 1);
        for (uint32_t c = 1; c <= k; ++c) {
            sigs[c] = prober.run(ForcedFault{s, c});
        }
        for (uint32_t c = 1; c <= k; ++c) {
            ++g.fault_components;
            const Signature& sig = sigs[c];
            if (sig.nodes.empty()) {
                if (sig.logical) ++g.undetectable_logical;
                continue;
            }
            if (sig.nodes.size() <= 2) {
                add(sig, p);
                continue;
            }
            // Two-qubit channel: split into the Pauli on each qubit.
            if (site.kind == FaultKind::Depolarize2 && (c & 3) != 0 && (c >> 2) != 0) {
                const Signature& a = sigs[c & 3];
                const Signature& b = sigs[c & 12];
                const Signature sum = xor_signature(a, b);
                const bool graphlike = a.nodes.size() <= 2 && b.nodes.size() <= 2 && !a.nodes.empty() && !b.nodes.empty();
                if (graphlike && sum.nodes == sig.nodes && sum.logical == sig.logical) {
                    add(a, p);
                    add(b, p);
                    ++g.decomposed;
                    continue;
                }
            }
            ++g.dropped_hyperedges;
        }
    }
    g.finalize();
    return g;
}

void append_round_nodes(const DetectorGraph& graph, uint32_t round, std::span<const uint8_t> bits, std::vector<uint32_t>& out) {
    if (bits.size() != graph.per_type) {
        throw std::invalid_argument("defect vector width does not match the graph");
    }
    for (uint32_t k = 0; k < bits.size(); ++k) {
        if (bits[k]) out.push_back(graph.node(round, k));
    }
}

std::vector<uint32_t> detector_nodes(const DetectorGraph& graph, const DefectHistory& history) {
    if (history.basis != graph.basis || history.per_type != graph.per_type || history.rounds < graph.rounds) {
        throw std::invalid_argument("defect history does not match the graph");
    }
    if (graph.has_final && history.rounds != graph.rounds) {
        throw std::invalid_argument("final layer requires the full history");
    }
    std::vector<uint32_t> out;
    for (uint32_t n = 1; n <= graph.rounds; ++n) {
        append_round_nodes(graph, n, history.round(graph.type, n), out);
    }
    if (graph.has_final) {
        append_round_nodes(graph, graph.rounds + 1, history.final_frame.defects, out);
    }
    return out;
}

namespace {

struct Costs {
    size_t k;
    std::vector<int64_t> w;    // k x k
    std::vector<uint8_t> wm;   // parity sets
    std::vector<int64_t> wb;   // to boundary
    std::vector<uint8_t> wbm;

    int64_t pair(size_t i, size_t j) const {
        return w[i * k + j];
    }
    uint8_t pair_mask(size_t i, size_t j) const {
        return wm[i * k + j];
    }
};

bool canonical(uint8_t mask) {
    return mask == 2;
}

void decode_dp(const Costs& c, std::vector<size_t>& partner, MatchResult& r) {
    const size_t k = c.k;
    const size_t full = (size_t{1} << k) - 1;
    std::vector<int64_t> cost(full + 1, kInf);
    std::vector<uint8_t> par(full + 1, 0);
    cost[0] = 0;
    par[0] = 1;
    for (size_t mask = 1; mask <= full; ++mask) {
        const size_t i = static_cast<size_t>(std::countr_zero(mask));
        const size_t rest = mask ^ (size_t{1} << i);
        int64_t best = add_sat(c.wb[i], cost[rest]);
        uint8_t bm = best == kInf ? 0 : compose_parity(c.wbm[i], par[rest]);
        for (size_t m = rest; m; m &= m - 1) {
            const size_t j = static_cast<size_t>(std::countr_zero(m));
            const size_t sub = rest ^ (size_t{1} << j);
            const int64_t v = add_sat(c.pair(i, j), cost[sub]);
            if (v == kInf) continue;
            const uint8_t vm = compose_parity(c.pair_mask(i, j), par[sub]);
            if (v < best) {
                best = v;
                bm = vm;
            } else if (v == best) {
                bm |= vm;
            }
        }
        cost[mask] = best;
        par[mask] = bm;
    }
    if (cost[full] == kInf) {
        throw std::logic_error("no feasible matching");
    }
    r.total_weight = cost[full];
    r.flip_ambiguous = par[full] == 3;
    // Walk back choosing the smallest partner among optimal options.
    size_t mask = full;
    while (mask) {
        const size_t i = static_cast<size_t>(std::countr_zero(mask));
        const size_t rest = mask ^ (size_t{1} << i);
        const int64_t target = cost[mask];
        int options = 0;
        size_t chosen = k;
        for (size_t m = rest; m; m &= m - 1) {
            const size_t j = static_cast<size_t>(std::countr_zero(m));
            if (add_sat(c.pair(i, j), cost[rest ^ (size_t{1} << j)]) == target) {
                if (options++ == 0) chosen = j;
            }
        }
        if (add_sat(c.wb[i], cost[rest]) == target) {
            if (options++ == 0) chosen = k;
        }
        if (options > 1) r.tie = true;
        partner[i] = chosen;
        if (chosen == k) {
            r.logical_flip ^= canonical(c.wbm[i]);
            mask = rest;
        } else {
            partner[chosen] = i;
            r.logical_flip ^= canonical(c.pair_mask(i, chosen));
            mask = rest ^ (size_t{1} << chosen);
        }
    }
}

class BranchAndBound {
   public:
    BranchAndBound(const Costs& c) : c_(c), k_(c.k), used_(c.k, false), cur_(c.k, c.k) {
        // Doubled units keep the half-edge bound integral.
        lb2_.resize(k_);
        for (size_t i = 0; i < k_; ++i) {
            int64_t lb = c.wb[i] == kInf ? kInf : 2 * c.wb[i];
            for (size_t j = 0; j < k_; ++j) {
                if (j != i && c.pair(i, j) != kInf) lb = std::min(lb, c.pair(i, j));
            }
            lb2_[i] = lb;
            lb_sum_ = add_sat(lb_sum_, lb);
        }
    }

    void run(std::vector<size_t>& partner, MatchResult& r) {
        if (lb_sum_ == kInf) {
            throw std::logic_error("no feasible matching");
        }
        dfs(0, 1, false);
        if (best_ == kInf) {
            throw std::logic_error("no feasible matching");
        }
        partner = best_partner_;
        r.total_weight = best_ / 2;
        r.tie = tie_;
        r.flip_ambiguous = best_mask_ == 3;
        r.logical_flip = best_flip_;
    }

   private:
    void dfs(int64_t cost2, uint8_t mask, bool flip) {
        size_t i = 0;
        while (i < k_ && used_[i]) ++i;
        if (i == k_) {
            if (cost2 < best_) {
                best_ = cost2;
                best_partner_ = cur_;
                best_mask_ = mask;
                best_flip_ = flip;
                tie_ = false;
            } else if (cost2 == best_) {
                tie_ = true;
                best_mask_ |= mask;
            }
            return;
        }
        used_[i] = true;
        lb_sum_ -= lb2_[i];
        for (size_t j = i + 1; j <= k_; ++j) {
            const bool to_boundary = j == k_;
            if (!to_boundary && used_[j]) continue;
            const int64_t w = to_boundary ? c_.wb[i] : c_.pair(i, j);
            if (w == kInf) continue;
            const int64_t next = cost2 + 2 * w;
            const int64_t rest_lb = to_boundary ? lb_sum_ : lb_sum_ - lb2_[j];
            if (next + rest_lb > best_) continue;
            const uint8_t wm = to_boundary ? c_.wbm[i] : c_.pair_mask(i, j);
            cur_[i] = j;
            if (!to_boundary) {
                used_[j] = true;
                cur_[j] = i;
                lb_sum_ -= lb2_[j];
            }
            dfs(next, compose_parity(mask, wm), flip ^ canonical(wm));
            if (!to_boundary) {
                used_[j] = false;
                cur_[j] = k_;
                lb_sum_ += lb2_[j];
            }
            cur_[i] = k_;
        }
        lb_sum_ += lb2_[i];
        used_[i] = false;
    }

    const Costs& c_;
    size_t k_;
    std::vector<bool> used_;
    std::vector<size_t> cur_;
    std::vector<int64_t> lb2_;
    int64_t lb_sum_ = 0;
    int64_t best_ = kInf;
    std::vector<size_t> best_partner_;
    uint8_t best_mask_ = 0;
    bool best_flip_ = false;
    bool tie_ = false;
};

}  // namespace

MatchResult decode(const DetectorGraph& graph, std::span<const uint32_t> defects, size_t dp_limit) {
    if (!graph.finalized()) {
        throw std::logic_error("decode on a graph that is not finalized");
    }
    std::vector<uint32_t> d(defects.begin(), defects.end());
    std::sort(d.begin(), d.end());
    if (std::adjacent_find(d.begin(), d.end()) != d.end()) {
        throw std::invalid_argument("duplicate defect");
    }
    if (!d.empty() && d.back() >= graph.num_detectors()) {
        throw std::invalid_argument("defect is not a detector node");
    }
    if (dp_limit > 24) {
        throw std::invalid_argument("dp_limit above 24 needs too much memory");
    }
    MatchResult r;
    const size_t k = d.size();
    if (k == 0) return r;

    Costs c;
    c.k = k;
    c.w.assign(k * k, kInf);
    c.wm.assign(k * k, 0);
    c.wb.resize(k);
    c.wbm.resize(k);
    for (size_t i = 0; i < k; ++i) {
        for (size_t j = 0; j < k; ++j) {
            if (i == j) continue;
            c.w[i * k + j] = graph.distance(d[i], d[j]);
            c.wm[i * k + j] = graph.parity_set(d[i], d[j]);
        }
        c.wb[i] = graph.distance(d[i], graph.boundary());
        c.wbm[i] = graph.parity_set(d[i], graph.boundary());
    }

    std::vector<size_t> partner(k, k);
    if (k <= dp_limit) {
        decode_dp(c, partner, r);
    } else {
        r.used_branch_and_bound = true;
        BranchAndBound(c).run(partner, r);
    }
    for (size_t i = 0; i < k; ++i) {
        if (partner[i] == k) {
            r.pairs.push_back({d[i], graph.boundary()});
        } else if (partner[i] > i) {
            r.pairs.push_back({d[i], d[partner[i]]});
        }
    }
    return r;
}

}  // namespace rtqec

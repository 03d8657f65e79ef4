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

#ifndef RTQEC_MWPM_H
#define RTQEC_MWPM_H

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rtqec/code_model.h"
#include "rtqec/noise_sim.h"
#include "rtqec/syndrome.h"

namespace rtqec {

/// Edge weights are ln((1-p)/p) stored as integers in units of 2^-20 so that
/// equal-weight matchings compare exactly.
inline constexpr double kWeightScale = 1048576.0;
/// Exact subset DP up to this many defects; branch and bound above.
inline constexpr size_t kMaxDpDefects = 16;

int64_t quantize_weight(double p);

struct GraphEdge {
    uint32_t u;
    uint32_t v;  // v == boundary() for boundary edges; u < v otherwise
    double probability;
    int64_t weight;
    bool logical;  // fault anticommutes with the tracked logical
};

/// Space-time detector graph of one stabilizer type. Detector (n, k) is the
/// defect of the k-th stabilizer of that type in round n (1-based); round
/// rounds+1 is the final-measurement layer when present. The boundary node
/// comes last.
class DetectorGraph {
   public:
    /// Manually assembled graph with `num_detectors` detectors.
    explicit DetectorGraph(uint32_t num_detectors);

    /// Adds a fault mechanism; parallel edges with the same logical effect
    /// compose as p1(1-p2) + p2(1-p1). Call finalize() before decoding.
    void add_edge(uint32_t u, uint32_t v, double p, bool logical);
    void finalize();

    uint32_t num_detectors() const {
        return num_detectors_;
    }
    uint32_t num_nodes() const {
        return num_detectors_ + 1;
    }
    uint32_t boundary() const {
        return num_detectors_;
    }
    const std::vector<GraphEdge>& edges() const {
        return edges_;
    }
    bool finalized() const {
        return finalized_;
    }
    /// Shortest-path weight; INT64_MAX when unreachable. The canonical path
    /// parity is even whenever some shortest path is even.
    int64_t distance(uint32_t a, uint32_t b) const {
        return dist_[static_cast<size_t>(a) * num_nodes() + b];
    }
    bool path_parity(uint32_t a, uint32_t b) const {
        return parity_mask_[static_cast<size_t>(a) * num_nodes() + b] == 2;
    }
    /// Bit 0: an even shortest path exists; bit 1: an odd one does.
    uint8_t parity_set(uint32_t a, uint32_t b) const {
        return parity_mask_[static_cast<size_t>(a) * num_nodes() + b];
    }

    // Metadata filled by build_graph.
    StabilizerType type = StabilizerType::Z;
    Basis basis = Basis::Z;
    uint32_t rounds = 0;        // syndrome rounds covered
    bool has_final = false;     // final-measurement layer present
    uint32_t per_type = 0;      // detectors per round
    bool edge_free = false;     // no fault has nonzero probability
    uint64_t fault_components = 0;
    uint64_t undetectable_logical = 0;  // components flipping the logical with no defect
    uint64_t decomposed = 0;            // hyperedges split into graph edges
    uint64_t dropped_hyperedges = 0;
    uint64_t annotation_conflicts = 0;  // parallel edges with opposite logical effect

    uint32_t node(uint32_t round, uint32_t position) const {
        return (round - 1) * per_type + position;
    }

    nlohmann::json to_json(const CodeLayout* layout = nullptr) const;

   private:
    struct Accum {
        double p[2] = {0.0, 0.0};  // by logical effect
    };

    uint32_t num_detectors_;
    std::map<std::pair<uint32_t, uint32_t>, Accum> pending_;
    std::vector<GraphEdge> edges_;
    bool finalized_ = false;
    std::vector<int64_t> dist_;
    std::vector<uint8_t> parity_mask_;
};

struct GraphOptions {
    /// Syndrome rounds covered. Defaults to the full experiment.
    uint32_t rounds = 0;
    /// Include the final-measurement layer. Only meaningful for the measured
    /// type and a graph covering all experiment rounds.
    bool include_final = true;
};

/// Probes the simulator with every elementary fault component and records
/// the defects it produces in stabilizers of `type`. Signatures with more
/// than two defects from two-qubit channels are split into their single-qubit
/// parts; anything else is dropped and counted.
DetectorGraph build_graph(
    const CodeLayout& layout,
    Basis basis,
    uint32_t rounds,
    const NoiseParams& noise,
    StabilizerType type,
    const std::vector<InjectionSpec>& injections = {},
    GraphOptions options = {});

/// Graph for the stabilizer type read out by the final measurement.
inline DetectorGraph build_graph(
    const CodeLayout& layout, Basis basis, uint32_t rounds, const NoiseParams& noise) {
    return build_graph(layout, basis, rounds, noise, measured_type(basis));
}

struct MatchResult {
    /// Matched node pairs; the second entry is graph.boundary() for defects
    /// matched to the boundary. Ordered by first defect.
    std::vector<std::pair<uint32_t, uint32_t>> pairs;
    int64_t total_weight = 0;
    bool logical_flip = false;
    /// More than one minimum-weight matching exists.
    bool tie = false;
    /// Minimum-weight matchings (or shortest paths) disagree on the flip.
    bool flip_ambiguous = false;
    bool used_branch_and_bound = false;

    double weight() const {
        return static_cast<double>(total_weight) / kWeightScale;
    }
};

/// Exact minimum-weight perfect matching of `defects` (detector node ids,
/// any order, no duplicates) with free use of the boundary. Ties resolve to
/// the lexicographically smallest partner list over ascending defects.
/// Defect counts above `dp_limit` use branch and bound.
MatchResult decode(const DetectorGraph& graph, std::span<const uint32_t> defects, size_t dp_limit = kMaxDpDefects);

/// Detector node ids of a recorded defect history for `graph`.
std::vector<uint32_t> detector_nodes(const DetectorGraph& graph, const DefectHistory& history);
/// Appends the detectors of one round (1-based) given per-type defect bits.
void append_round_nodes(const DetectorGraph& graph, uint32_t round, std::span<const uint8_t> bits, std::vector<uint32_t>& out);

}  // namespace rtqec

#endif

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

#ifndef RTQEC_SCALING_ESTIMATOR_H
#define RTQEC_SCALING_ESTIMATOR_H

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace rtqec {

// Anchors from the d=3 build: 32 hidden units, 399 DSP slices, 124 ns.
inline constexpr uint32_t kAnchorHidden = 32;
inline constexpr uint32_t kAnchorDsp = 399;
inline constexpr uint32_t kAnchorLatencyNs = 124;
/// DSP slices of the reference device (AMD VU13P).
inline constexpr uint32_t kReferenceDsp = 12288;

/// Per-decoder projection. Hidden size grows linearly with d, DSP with h^2
/// and latency with h.
struct ScalingRow {
    int d = 0;
    uint32_t dim_x = 0;
    uint32_t h = 0;
    uint64_t p_lstm = 0;
    uint64_t dsp = 0;
    uint64_t latency_ns = 0;
    double utilization = 0.0;  // percent of kReferenceDsp

    nlohmann::json to_json() const;
    bool operator==(const ScalingRow&) const = default;
};

/// Throws std::invalid_argument unless d is odd and >= 3.
ScalingRow project(int d);

struct SupportedDistance {
    std::optional<int> single;  // one decoder per device
    std::optional<int> dual;    // an X and a Z decoder per logical qubit

    nlohmann::json to_json() const;
};

/// Largest odd d whose projected DSP use fits `dsp_capacity`; empty when even
/// d=3 does not fit.
SupportedDistance max_supported_distance(uint64_t dsp_capacity);

/// Odd distances 3, 5, ..., 17.
std::vector<int> default_distances();

std::string scaling_csv(std::span<const ScalingRow> rows);
std::string scaling_markdown(std::span<const ScalingRow> rows);

}  // namespace rtqec

#endif

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

#include "rtqec/scaling_estimator.h"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace rtqec {

nlohmann::json ScalingRow::to_json() const {
    return {{"d", d},
            {"dim_x", dim_x},
            {"h", h},
            {"p_lstm", p_lstm},
            {"dsp", dsp},
            {"latency_ns", latency_ns},
            {"utilization_pct", utilization}};
}

ScalingRow project(int d) {
    if (d < 3 || d % 2 == 0) {
        throw std::invalid_argument("distance must be odd and at least 3 (got " + std::to_string(d) + ")");
    }
    ScalingRow r;
    r.d = d;
    r.dim_x = static_cast<uint32_t>((d * d - 1) / 2);
    r.h = static_cast<uint32_t>(std::lround(kAnchorHidden * d / 3.0));
    const uint64_t h = r.h;
    r.p_lstm = 4 * (r.dim_x * h + h * h + h);
    const double scale = static_cast<double>(h) / kAnchorHidden;
    r.dsp = static_cast<uint64_t>(std::llround(kAnchorDsp * scale * scale));
    r.latency_ns = static_cast<uint64_t>(std::llround(kAnchorLatencyNs * scale));
    r.utilization = 100.0 * static_cast<double>(r.dsp) / kReferenceDsp;
    return r;
}

nlohmann::json SupportedDistance::to_json() const {
    return {{"single", single ? nlohmann::json(*single) : nlohmann::json(nullptr)},
            {"dual", dual ? nlohmann::json(*dual) : nlohmann::json(nullptr)}};
}

SupportedDistance max_supported_distance(uint64_t dsp_capacity) {
    SupportedDistance out;
    // DSP use is monotone in d, so stop at the first miss.
    for (int d = 3;; d += 2) {
        const uint64_t dsp = project(d).dsp;
        if (dsp > dsp_capacity) break;
        out.single = d;
        if (2 * dsp <= dsp_capacity) out.dual = d;
    }
    return out;
}

std::vector<int> default_distances() {
    return {3, 5, 7, 9, 11, 13, 15, 17};
}

std::string scaling_csv(std::span<const ScalingRow> rows) {
    std::string out = "d,dim_x,h,p_lstm,dsp,utilization_pct,latency_ns\n";
    char line[128];
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%d,%u,%u,%llu,%llu,%.1f,%llu\n", r.d, r.dim_x, r.h,
                      static_cast<unsigned long long>(r.p_lstm), static_cast<unsigned long long>(r.dsp),
                      r.utilization, static_cast<unsigned long long>(r.latency_ns));
        out += line;
    }
    return out;
}

std::string scaling_markdown(std::span<const ScalingRow> rows) {
    std::string out =
        "| d | dim(x) | h | P_LSTM | DSP (% of VU13P) | Latency (ns) |\n"
        "|---|---|---|---|---|---|\n";
    char line[160];
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "| %d | %u | %u | %llu | %llu (%.1f%%) | %llu |\n", r.d, r.dim_x, r.h,
                      static_cast<unsigned long long>(r.p_lstm), static_cast<unsigned long long>(r.dsp),
                      r.utilization, static_cast<unsigned long long>(r.latency_ns));
        out += line;
    }
    return out;
}

}  // namespace rtqec

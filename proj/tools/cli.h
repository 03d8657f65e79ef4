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

#ifndef RTQEC_TOOLS_CLI_H
#define RTQEC_TOOLS_CLI_H

#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "rtqec/realtime_loop.h"

namespace rtqec::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes: 0 success, 1 runtime failure, 2 invalid flags or config.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs `qecrt` with `args` (without the program name).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Fidelity-decay plot, one series per entry.
struct PlotSeries {
    std::string label;
    std::vector<RoundPoint> points;
};
std::string fidelity_svg(const std::vector<PlotSeries>& series);

}  // namespace rtqec::cli

#endif

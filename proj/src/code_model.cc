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

#include "rtqec/code_model.h"

#include <algorithm>
#include <charconv>
#include <stdexcept>

namespace rtqec {

char basis_char(Basis b) {
    return b == Basis::Z ? 'Z' : 'X';
}

Basis parse_basis(std::string_view text) {
    if (text == "Z" || text == "z") {
        return Basis::Z;
    }
    if (text == "X" || text == "x") {
        return Basis::X;
    }
    throw std::invalid_argument("unknown basis '" + std::string(text) + "' (expected Z or X)");
}

char type_char(StabilizerType t) {
    return t == StabilizerType::Z ? 'Z' : 'X';
}

char axis_char(PauliAxis a) {
    return a == PauliAxis::X ? 'X' : 'Z';
}

PauliAxis parse_axis(std::string_view text) {
    if (text == "X" || text == "x") {
        return PauliAxis::X;
    }
    if (text == "Z" || text == "z") {
        return PauliAxis::Z;
    }
    throw std::invalid_argument("unknown Pauli axis '" + std::string(text) + "' (expected X or Z)");
}

CodeLayout::CodeLayout(int distance) : distance_(distance) {
    if (distance < 3 || distance % 2 == 0) {
        throw std::invalid_argument(
            "distance must be an odd integer >= 3, got " + std::to_string(distance));
    }
    const int d = distance;
    auto data_at = [d](int r, int c) -> int {
        if (r < 0 || c < 0 || r >= d || c >= d) {
            return kNoPartner;
        }
        return r * d + c;
    };

    for (int i = 0; i <= d; ++i) {
        for (int j = 0; j <= d; ++j) {
            const bool z_type = (i + j) % 2 == 0;
            const bool top_bottom = (i == 0 || i == d) && j > 0 && j < d;
            const bool left_right = (j == 0 || j == d) && i > 0 && i < d;
            const bool bulk = i > 0 && i < d && j > 0 && j < d;
            const bool keep = bulk || (top_bottom && !z_type) || (left_right && z_type);
            if (!keep) {
                continue;
            }
            Ancilla a;
            a.index = static_cast<uint32_t>(ancillas_.size());
            a.type = z_type ? StabilizerType::Z : StabilizerType::X;
            a.face_row = i;
            a.face_col = j;
            const int nw = data_at(i - 1, j - 1);
            const int ne = data_at(i - 1, j);
            const int sw = data_at(i, j - 1);
            const int se = data_at(i, j);
            if (z_type) {
                a.schedule = {nw, sw, ne, se};
            } else {
                a.schedule = {nw, ne, sw, se};
            }
            for (int q : a.schedule) {
                if (q != kNoPartner) {
                    a.support.push_back(static_cast<uint32_t>(q));
                }
            }
            std::sort(a.support.begin(), a.support.end());
            ancillas_.push_back(std::move(a));
        }
    }

    position_in_type_.resize(ancillas_.size());
    for (const auto& a : ancillas_) {
        auto& list = a.type == StabilizerType::Z ? z_ancillas_ : x_ancillas_;
        position_in_type_[a.index] = list.size();
        list.push_back(a.index);
    }

    for (int c = 0; c < d; ++c) {
        logical_z_.push_back(static_cast<uint32_t>(c));
    }
    for (int r = 0; r < d; ++r) {
        logical_x_.push_back(static_cast<uint32_t>(r * d + d - 1));
    }
}

std::vector<uint32_t> CodeLayout::stabilizers_touching(uint32_t data, StabilizerType t) const {
    std::vector<uint32_t> out;
    for (uint32_t a : ancillas_of_type(t)) {
        const auto& sup = ancillas_[a].support;
        if (std::binary_search(sup.begin(), sup.end(), data)) {
            out.push_back(a);
        }
    }
    return out;
}

std::string CodeLayout::data_label(uint32_t data) {
    return "D" + std::to_string(data + 1);
}

std::string CodeLayout::ancilla_label(uint32_t ancilla) {
    return "A" + std::to_string(ancilla + 1);
}

std::pair<bool, uint32_t> CodeLayout::parse_label(std::string_view label) {
    if (label.size() < 2 || (label[0] != 'D' && label[0] != 'A' && label[0] != 'd' && label[0] != 'a')) {
        throw std::invalid_argument("bad qubit label '" + std::string(label) + "' (expected D<k> or A<k>)");
    }
    uint32_t number = 0;
    auto [ptr, ec] = std::from_chars(label.data() + 1, label.data() + label.size(), number);
    if (ec != std::errc() || ptr != label.data() + label.size() || number == 0) {
        throw std::invalid_argument("bad qubit label '" + std::string(label) + "'");
    }
    const bool is_ancilla = label[0] == 'A' || label[0] == 'a';
    return {is_ancilla, number - 1};
}

nlohmann::json CodeLayout::to_json() const {
    nlohmann::json j;
    j["distance"] = distance_;
    auto& data = j["data_qubits"] = nlohmann::json::array();
    for (uint32_t q = 0; q < num_data(); ++q) {
        data.push_back(data_label(q));
    }
    auto& anc = j["ancilla_qubits"] = nlohmann::json::array();
    for (const auto& a : ancillas_) {
        nlohmann::json e;
        e["id"] = ancilla_label(a.index);
        e["type"] = std::string(1, type_char(a.type));
        e["face"] = {a.face_row, a.face_col};
        auto& sup = e["support"] = nlohmann::json::array();
        for (uint32_t q : a.support) {
            sup.push_back(data_label(q));
        }
        auto& sched = e["schedule"] = nlohmann::json::array();
        for (int q : a.schedule) {
            sched.push_back(q == kNoPartner ? nlohmann::json(nullptr) : nlohmann::json(data_label(q)));
        }
        anc.push_back(std::move(e));
    }
    auto labels = [](const std::vector<uint32_t>& v) {
        nlohmann::json out = nlohmann::json::array();
        for (uint32_t q : v) {
            out.push_back(data_label(q));
        }
        return out;
    };
    j["logical_z_support"] = labels(logical_z_);
    j["logical_x_support"] = labels(logical_x_);
    return j;
}

CodeLayout build_layout(int distance) {
    return CodeLayout(distance);
}

}  // namespace rtqec

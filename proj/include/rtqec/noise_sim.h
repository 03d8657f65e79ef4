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

#ifndef RTQEC_NOISE_SIM_H
#define RTQEC_NOISE_SIM_H

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rtqec/code_model.h"

namespace rtqec {

struct NoiseParams {
    double p1 = 0.001;      // depolarizing after each single-qubit gate
    double p2 = 0.005;      // two-qubit depolarizing after each CNOT
    double p_idle = 0.002;  // depolarizing on data qubits per measurement window
    double p_meas = 0.01;   // classical flip of each measurement bit
    bool no_reset = true;   // ancillas are never reset; only `true` is supported

    static NoiseParams noiseless();
    bool is_noiseless() const;
    /// Throws std::invalid_argument if any probability is outside [0, 0.5].
    void validate() const;

    nlohmann::json to_json() const;
    static NoiseParams from_json(const nlohmann::json& j);

    bool operator==(const NoiseParams&) const = default;
};

enum class InjectionSchedule : uint8_t { EachRound = 0, BeforeRound = 1 };

/// A deliberate X(theta) or Z(theta) rotation on one data qubit. The following
/// parity check projects it onto a Pauli flip with probability sin^2(theta/2),
/// which is how the frame simulator applies it.
struct InjectionSpec {
    bool target_is_ancilla = false;
    uint32_t target = 0;  // 0-based qubit index within its role
    PauliAxis axis = PauliAxis::X;
    double theta_deg = 0.0;
    InjectionSchedule schedule = InjectionSchedule::EachRound;
    uint32_t round = 1;  // 1-based; used by BeforeRound

    double flip_probability() const;
    bool applies_to(uint32_t round_index) const;
    void validate(const CodeLayout& layout) const;

    /// "D2:X:40deg:each-round" or "D9:Z:30:round-3". The "deg" suffix and the
    /// schedule field are optional (default each-round).
    static InjectionSpec parse(std::string_view text);
    std::string to_string() const;
    nlohmann::json to_json() const;
    static InjectionSpec from_json(const nlohmann::json& j);

    bool operator==(const InjectionSpec&) const = default;
};

/// Raw bits of one simulated memory-experiment shot.
struct ShotRecord {
    uint16_t distance = 0;
    uint16_t rounds = 0;
    Basis basis = Basis::Z;
    std::vector<uint8_t> ancilla_bits;  // rounds x (d*d-1), round-major, a_n^i
    std::vector<uint8_t> data_bits;     // d*d final data outcomes d^i
    bool truth_x_flip = false;          // accumulated error anticommutes with Z_L
    bool truth_z_flip = false;          // accumulated error anticommutes with X_L
    uint64_t seed = 0;                  // shot-level seed

    size_t num_ancillas() const {
        return static_cast<size_t>(distance) * distance - 1;
    }
    /// Ancilla outcomes of round n (1-based).
    std::span<const uint8_t> round_bits(uint32_t n) const {
        return std::span<const uint8_t>(ancilla_bits).subspan((n - 1) * num_ancillas(), num_ancillas());
    }

    bool operator==(const ShotRecord&) const = default;
};

/// SplitMix64 finalizer; used to derive independent counter-based streams.
uint64_t mix_seed(uint64_t value);
/// Seed of stream `index` under `base`. Shots use derive_seed(seed, shot).
uint64_t derive_seed(uint64_t base, uint64_t index);

enum class FaultKind : uint8_t { Depolarize1 = 0, Depolarize2 = 1, MeasureFlip = 2, Injection = 3 };

/// One stochastic location in the circuit, in execution order.
struct FaultSite {
    FaultKind kind;
    uint32_t q0;           // qubit (global index) or, for MeasureFlip, the qubit measured
    uint32_t q1;           // second qubit for Depolarize2
    double probability;    // total probability of the channel
    uint32_t round;        // 0 = preparation, 1..N rounds, N+1 = final measurement
    PauliAxis axis;        // Injection only
};

/// Number of non-identity components of a fault channel.
uint32_t component_count(FaultKind kind);
/// Probability of one component (p/3 for one-qubit depolarizing, p/15 for
/// two-qubit, p otherwise).
double component_probability(const FaultSite& site);

struct ForcedFault {
    size_t site;         // index into the enumerated site list
    uint32_t component;  // 1..component_count(kind)
};

/// Pauli-frame simulator of the d-distance rotated memory circuit:
/// transversal preparation, N rounds of H/CNOT stabilizer extraction without
/// ancilla reset, transversal data readout.
///
/// Qubit numbering: data 0..d*d-1, then ancillas d*d + ancilla index.
/// The measurement record is the all-zero reference sample XOR the frame. A
/// separate gauge frame randomizes physically meaningless Paulis so that raw
/// bits look like hardware output (random first-round values of the
/// complementary stabilizers); truth labels are read from the error frame only.
class FrameSimulator {
   public:
    FrameSimulator(const CodeLayout& layout, Basis basis, NoiseParams noise, std::vector<InjectionSpec> injections);

    /// Random sampling with all noise channels active.
    void begin_shot(uint64_t shot_seed);
    /// Deterministic run: no random noise, no gauge; at most one forced fault.
    void begin_probe(std::optional<ForcedFault> fault = std::nullopt);
    /// Deterministic run that records every fault site it passes.
    void begin_enumeration();

    /// Runs the next stabilizer round (injections first) and returns a_n for
    /// all ancillas in layout order.
    std::vector<uint8_t> run_round();
    /// Applies a physical correction gate to a data qubit. In sampling mode the
    /// gate carries p1 depolarizing noise drawn from its own substream, so
    /// pulses never shift the main noise stream.
    void apply_correction(uint32_t data, PauliAxis axis);
    /// Transversal readout in the simulator's basis.
    std::vector<uint8_t> measure_data();

    uint32_t rounds_done() const {
        return round_;
    }
    /// Error-frame logical parities. After measure_data() the label of the
    /// measured logical includes the readout flips, so it equals the raw
    /// logical parity of the data bits.
    bool truth_x_flip() const;
    bool truth_z_flip() const;

    const std::vector<FaultSite>& sites() const {
        return sites_;
    }
    const CodeLayout& layout() const {
        return *layout_;
    }
    Basis basis() const {
        return basis_;
    }

   private:
    enum class Mode : uint8_t { Sample, Probe, Enumerate };
    enum class OpCode : uint8_t { H, CX, MeasureAncilla, MeasureData, Dep1, Dep2, Inject };
    struct Op {
        OpCode code;
        uint32_t a;
        uint32_t b;
        double p;
    };

    void start(Mode mode);
    void execute(const Op& op);
    uint32_t draw_component(FaultKind kind, uint32_t q0, uint32_t q1, double p, PauliAxis axis = PauliAxis::X);
    void apply_pauli(uint32_t q, uint32_t xz);
    double uniform();

    const CodeLayout* layout_;
    Basis basis_;
    NoiseParams noise_;
    std::vector<InjectionSpec> injections_;

    std::vector<Op> prep_ops_;
    std::vector<Op> round_ops_;
    std::vector<Op> final_ops_;

    Mode mode_ = Mode::Probe;
    std::mt19937_64 noise_rng_;
    std::mt19937_64 gauge_rng_;
    std::mt19937_64 pulse_rng_;
    std::optional<ForcedFault> forced_;
    size_t site_counter_ = 0;
    std::vector<FaultSite> sites_;

    std::vector<uint8_t> ex_, ez_, gx_, gz_;
    std::vector<uint8_t> record_;
    std::vector<uint8_t> data_flips_;
    uint32_t round_ = 0;
    bool measured_ = false;
};

/// Samples `shots` independent memory shots. Shot k uses
/// derive_seed(seed, k), so results do not depend on `workers`.
std::vector<ShotRecord> sample_memory(
    const CodeLayout& layout,
    Basis basis,
    uint32_t rounds,
    const NoiseParams& noise,
    const std::vector<InjectionSpec>& injections,
    uint64_t shots,
    uint64_t seed,
    unsigned workers = 1,
    uint64_t first_shot = 0);

/// Samples shot k with seed derive_seed(seed, k).
ShotRecord sample_shot(FrameSimulator& sim, uint32_t rounds, uint64_t seed, uint64_t shot_index);

void validate_experiment(
    const CodeLayout& layout, uint32_t rounds, const NoiseParams& noise, const std::vector<InjectionSpec>& injections);

}  // namespace rtqec

#endif

// Copyright 2026 The repstab Authors
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

#ifndef REPSTAB_FRAME_SIMULATOR_H
#define REPSTAB_FRAME_SIMULATOR_H

#include <array>
#include <utility>
#include <cstdint>
#include <vector>

#include "repstab/circuit.h"
#include "repstab/noise.h"
#include "repstab/rng.h"

namespace repstab {

/// How a noisy operation corrupts the state.
enum class Channel : uint8_t {
    Depolarize1,  // X, Y, Z with p/3 each, after the op
    Depolarize2,  // 15 two-qubit Paulis with p/15 each, after a CZ
    ResultFlip,   // classical flip of a measurement result
    BitFlip,      // X after a reset
};

/// Pauli codes: bit 0 = X on q0, bit 1 = Z on q0, bit 2 = X on q1, bit 3 = Z on q1.
inline constexpr uint8_t kPauliX = 1;
inline constexpr uint8_t kPauliZ = 2;
inline constexpr uint8_t kPauliY = 3;

struct NoiseLocation {
    uint32_t moment;
    OpKind kind;
    Component component;
    Channel channel;
    uint32_t q0;
    uint32_t q1;
    uint32_t measurement;  // schedule index, ResultFlip only
};

/// Pauli frame over a block of up to 64 shots: bit k of x[q] / z[q] is the X / Z
/// component of the error on qubit q in shot k of the block.
struct PauliFrame {
    std::vector<uint64_t> x;
    std::vector<uint64_t> z;
};

/// Bit-sliced measurement flips relative to the reference record.
struct SampleBlock {
    uint64_t first_shot = 0;
    size_t n_shots = 0;
    std::vector<uint64_t> flips;  // one word per measurement, schedule order
    uint64_t burst = 0;           // lanes inside a burst window
};

/// One Pauli error at one location and the measurements it flips.
struct SingleError {
    uint32_t location;
    uint8_t pauli;
    std::vector<uint32_t> flipped;  // schedule indices, ascending
};

/// Correlated Pauli process compiled from a code-level CorrelatedChannel.
///
/// `rounds[t]` lists the (location, Pauli) injections of round t. Independent
/// channels apply round t's whole group with `probability`. Persistent
/// channels switch on with `probability` per round, then inject a uniformly
/// random Pauli from {I, X, Y, Z} at each listed location while on, staying on
/// with `survival` per round.
struct JointChannel {
    enum class Kind : uint8_t { Independent, Persistent };
    Kind kind = Kind::Independent;
    double probability = 0.0;
    double survival = 0.0;
    std::vector<std::vector<std::pair<uint32_t, uint8_t>>> rounds;
};

/// Probability with which a given single error occurs under `noise`.
double single_error_probability(const NoiseLocation &loc, const NoiseModel &noise);

/// Monte Carlo sampler propagating Pauli frames through a circuit, 64 shots
/// per machine word.
///
/// Every random decision of shot j is drawn from the Philox stream (seed, j),
/// so any shot range can be regenerated independently of the others. Per
/// component, candidate error sites are drawn at an envelope rate q >= p and
/// kept with probability p/q using a separate word of the same draw; holding
/// the envelope fixed while varying p therefore couples runs at different rates
/// (common random numbers).
class FrameSimulator {
   public:
    /// Uses the six component rates and bursts of `noise`; correlated channels
    /// act only through `joint` (see compile_channels).
    FrameSimulator(const Circuit &circuit, const NoiseModel &noise, uint64_t seed,
                   std::vector<JointChannel> joint = {});

    /// Raises the candidate rate of each component to at least `envelope`.
    void set_envelope(const std::array<double, kNumComponents> &envelope);

    void sample(uint64_t first_shot, size_t n_shots, SampleBlock &out);

    const std::vector<NoiseLocation> &locations() const { return locations_; }
    const Circuit &circuit() const { return circuit_; }
    size_t measurement_count() const { return circuit_.measurement_count(); }

    /// Burst factor applied to shot j (1 outside bursts).
    double burst_factor(uint64_t shot) const;

   private:
    struct Instr {
        OpKind kind;
        uint32_t q0;
        uint32_t q1;
        int32_t loc;
        uint32_t meas;
    };
    friend std::vector<SingleError> enumerate_single_errors(const Circuit &circuit);
    friend class FrameInjector;

    void run(uint64_t *flips);
    void inject(uint32_t loc, uint64_t lanes, uint8_t pauli);
    void sample_component(size_t c, uint64_t shot, uint64_t lane, double factor);
    void sample_channels(uint64_t shot, uint64_t lane);

    Circuit circuit_;
    NoiseModel noise_;
    Philox4x32 rng_;
    std::vector<Instr> program_;
    std::vector<NoiseLocation> locations_;
    std::array<std::vector<uint32_t>, kNumComponents> by_component_;
    std::array<double, kNumComponents> envelope_{};
    std::vector<JointChannel> joint_;
    // Pending injections, cleared as they are consumed.
    std::vector<std::array<uint64_t, 4>> masks_;
    PauliFrame frame_;
};

/// Propagates explicit Pauli injections (no random noise); used for exhaustive
/// single-error sweeps and equivalence checks.
class FrameInjector {
   public:
    explicit FrameInjector(const Circuit &circuit);
    const std::vector<NoiseLocation> &locations() const { return sim_.locations(); }
    void add(uint32_t location, uint64_t lanes, uint8_t pauli) { sim_.inject(location, lanes, pauli); }
    /// Runs the circuit and returns one flip word per measurement.
    std::vector<uint64_t> run();

   private:
    FrameSimulator sim_;
};

/// Every (location, Pauli) single error with its flipped measurements.
std::vector<SingleError> enumerate_single_errors(const Circuit &circuit);

/// Qubits measured as stabilizers in order of first measurement, and data
/// qubits in final-readout order.
std::vector<uint32_t> stabilizer_qubits(const Circuit &circuit);
std::vector<uint32_t> final_data_qubits(const Circuit &circuit);

}  // namespace repstab

#endif

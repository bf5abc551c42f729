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

#ifndef REPSTAB_CODES_H
#define REPSTAB_CODES_H

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "repstab/circuit.h"
#include "repstab/frame_simulator.h"

namespace repstab {

enum class CodeFamily : uint8_t { RepBit, RepPhase, Surface2 };
enum class Basis : uint8_t { X, Z };

std::string_view family_name(CodeFamily f);
CodeFamily parse_family(std::string_view name);

struct CodeSpec {
    CodeFamily family = CodeFamily::RepPhase;
    uint32_t distance = 3;
    uint32_t rounds = 1;
    Basis basis = Basis::Z;  // surface2 only
    /// Fixed data-qubit initialization; empty means a fresh random string per
    /// batch of `init_batch` shots.
    std::optional<std::vector<uint8_t>> init;
    uint32_t init_batch = 1000;

    void validate() const;
    uint32_t data_count() const { return family == CodeFamily::Surface2 ? 4 : distance; }
    uint32_t measure_count() const { return family == CodeFamily::Surface2 ? 3 : distance - 1; }
    uint32_t qubit_count() const { return data_count() + measure_count(); }

    static CodeSpec repetition(CodeFamily family, uint32_t d, uint32_t rounds);
    static CodeSpec surface2(Basis basis, uint32_t rounds);
};

/// Data-qubit initialization used for a given shot.
std::vector<uint8_t> init_for_shot(const CodeSpec &spec, uint64_t seed, uint64_t shot);

/// Detection-node geometry and boundary rules of a code.
///
/// Node (s, t) has index s + n_measure * t for t in [0, rounds].
struct CodeLayout {
    CodeFamily family;
    Basis basis;
    uint32_t distance;
    uint32_t rounds;
    uint32_t n_measure;
    uint32_t n_data;
    std::vector<std::vector<uint32_t>> supports;  // data indices per stabilizer
    std::vector<uint32_t> logical_support;
    std::vector<uint8_t> first_masked;  // per stabilizer: round-0 outcome random
    std::vector<uint8_t> last_masked;   // per stabilizer: not reconstructible from final data
    uint64_t pulse_flips = 0;           // data bits flipped by the noiseless π pulses

    uint32_t n_nodes() const { return n_measure * (rounds + 1); }
    uint32_t node(uint32_t s, uint32_t t) const { return s + n_measure * t; }
    uint32_t node_s(uint32_t i) const { return i % n_measure; }
    uint32_t node_t(uint32_t i) const { return i / n_measure; }
    bool masked(uint32_t i) const;
    uint64_t support_mask(uint32_t s) const;
    uint64_t logical_mask() const;
};

CodeLayout layout_of(const CodeSpec &spec);

/// Circuit for `spec` with data qubits prepared from `init` (noiseless X gates
/// after the opening reset, so the noise locations do not depend on `init`).
Circuit build_circuit(const CodeSpec &spec, const std::vector<uint8_t> &init);
/// Circuit using spec.init (all zeros when the init is random).
Circuit build_repetition(const CodeSpec &spec);

/// Lowers the code-level correlated channels of `noise` onto noise locations of
/// `circuit` (which must come from build_circuit(spec, ...)).
std::vector<JointChannel> compile_channels(const CodeSpec &spec, const Circuit &circuit, const NoiseModel &noise);
Circuit build_surface2(const CodeSpec &spec);

/// A contiguous sub-chain of a repetition code.
struct SubsampleMap {
    uint32_t parent_d;
    uint32_t child_d;
    uint32_t offset;
    uint32_t parent_measure(uint32_t s) const { return s + offset; }
    uint32_t parent_data(uint32_t k) const { return k + offset; }
};

std::vector<SubsampleMap> subsample_maps(uint32_t d, uint32_t d_s);

}  // namespace repstab

#endif

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

#ifndef REPSTAB_CIRCUIT_H
#define REPSTAB_CIRCUIT_H

#include <array>
#include <optional>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace repstab {

/// The six component error parameters of the circuit noise model.
enum class Component : uint8_t { DD = 0, CZ = 1, M = 2, R = 3, H = 4, I = 5 };
inline constexpr size_t kNumComponents = 6;
inline constexpr std::array<Component, kNumComponents> kAllComponents = {
    Component::DD, Component::CZ, Component::M, Component::R, Component::H, Component::I};

std::string_view component_name(Component c);
/// Accepts "dd", "DD", "cz", ... Throws ValidationError on anything else.
Component parse_component(std::string_view name);

enum class OpKind : uint8_t { H, X, CZ, M, R, Idle };

/// Which error parameter applies after an op. `None` marks noiseless ops
/// (the compiled bit-flip pi pulses).
enum class NoiseClass : uint8_t { None, DD, CZ, M, R, H, I };

struct Op {
    OpKind kind;
    uint32_t q0;
    uint32_t q1 = 0;  // second operand, CZ only
    NoiseClass noise = NoiseClass::None;

    static Op h(uint32_t q) { return {OpKind::H, q, 0, NoiseClass::H}; }
    static Op x(uint32_t q) { return {OpKind::X, q, 0, NoiseClass::None}; }
    static Op cz(uint32_t a, uint32_t b) { return {OpKind::CZ, a, b, NoiseClass::CZ}; }
    static Op m(uint32_t q) { return {OpKind::M, q, 0, NoiseClass::M}; }
    static Op r(uint32_t q) { return {OpKind::R, q, 0, NoiseClass::R}; }
    static Op idle(uint32_t q, NoiseClass c) { return {OpKind::Idle, q, 0, c}; }
};

struct Moment {
    std::vector<Op> ops;
};

enum class MeasureRole : uint8_t { Stabilizer, FinalData };

/// One entry per M op, in circuit order.
struct MeasurementTag {
    uint32_t qubit;
    uint32_t round;
    MeasureRole role;
};

/// Layered Clifford circuit. Construct, fill, then call validate(); all
/// simulators assume a validated circuit.
struct Circuit {
    size_t qubit_count = 0;
    std::vector<Moment> moments;
    std::vector<MeasurementTag> measurement_schedule;

    /// Checks the structural invariants and throws ValidationError naming the
    /// offending moment: operand range, CZ operand distinctness, no qubit used
    /// twice per moment, measured qubits reset before reuse, and a schedule
    /// that lines up one-to-one with the M ops.
    void validate() const;

    size_t measurement_count() const { return measurement_schedule.size(); }
    size_t op_count() const;
};

std::optional<Component> component_of(NoiseClass c);

}  // namespace repstab

#endif

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

#ifndef REPSTAB_NOISE_H
#define REPSTAB_NOISE_H

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "repstab/circuit.h"

namespace repstab {

/// Transient device-wide error-rate elevation.
///
/// `rate` is the expected fraction of shots that fall inside a burst window.
/// A burst starting at shot k scales every component rate of shot j >= k by
/// max(1, amplitude * exp(-(j - k) / decay_shots)); the window is the span over
/// which that factor exceeds 1, and the per-shot start probability is
/// rate / window_length.
struct BurstConfig {
    double rate = 0.0;
    double amplitude = 1.0;
    double decay_shots = 1.0;

    void validate() const;
    /// Number of shots for which a single burst keeps the factor above 1.
    uint32_t window_length() const;
    double start_probability() const;
};

/// Correlated error proxies used to exercise the correlation-matrix method.
struct CorrelatedChannel {
    enum class Kind : uint8_t { PairFlip, PersistentFlip };
    Kind kind = Kind::PairFlip;

    // PairFlip: each round t in 1..N_r-1, with `probability`, detection nodes
    // (measure_a, t) and (measure_b, t) fire together. Realized as a joint
    // Pauli on the data chain between the two measure qubits during the
    // preceding measurement window, so no other node is touched.
    uint32_t measure_a = 0;
    uint32_t measure_b = 0;
    double probability = 0.0;

    // PersistentFlip: data qubit `data_qubit` enters a long-lived faulty state
    // with `probability` per round; while faulty it is fully depolarized during
    // every measurement window and stays faulty with `survival` per round.
    uint32_t data_qubit = 0;
    double survival = 0.5;

    void validate() const;
};

/// Six-parameter component depolarizing model plus optional extensions.
struct NoiseModel {
    std::array<double, kNumComponents> x{};
    std::optional<BurstConfig> bursts;
    std::vector<CorrelatedChannel> correlated;

    double rate(Component c) const { return x[static_cast<size_t>(c)]; }
    double &rate(Component c) { return x[static_cast<size_t>(c)]; }

    /// Probabilities in [0, 0.5], burst and channel invariants.
    void validate() const;
    NoiseModel scaled(double factor) const;

    static NoiseModel zero() { return NoiseModel{}; }
    static NoiseModel from_rates(double dd, double cz, double m, double r, double h, double i);

    /// Component rates used for the 10-round boundary-effect study.
    static NoiseModel boundary_study();
    /// Component rates of the bit-flip error budget.
    static NoiseModel bit_flip_budget();
    /// Component rates of the phase-flip error budget.
    static NoiseModel phase_flip_budget();
    /// Rates for the distance-2 surface code: the repetition-code gate, readout
    /// and reset rates with DD and I averaged over the two repetition codes,
    /// since surface-code data qubits are sensitive to both relaxation and
    /// dephasing.
    static NoiseModel surface2_model();
};

}  // namespace repstab

#endif

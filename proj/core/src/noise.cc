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

#include "repstab/noise.h"

#include <cmath>

#include "repstab/errors.h"

namespace repstab {

namespace {

void check_probability(double p, const std::string &what, double hi = 0.5) {
    if (!(p >= 0.0 && p <= hi)) {
        throw ValidationError(what + " must be in [0, " + std::to_string(hi) + "], got " + std::to_string(p));
    }
}

}  // namespace

void BurstConfig::validate() const {
    check_probability(rate, "burst rate", 0.1);
    if (!(amplitude >= 1.0) || !std::isfinite(amplitude)) {
        throw ValidationError("burst amplitude must be >= 1");
    }
    if (!(decay_shots > 0.0) || !std::isfinite(decay_shots)) {
        throw ValidationError("burst decay must be > 0 shots");
    }
}

uint32_t BurstConfig::window_length() const {
    if (amplitude <= 1.0) {
        return 0;
    }
    return static_cast<uint32_t>(std::ceil(decay_shots * std::log(amplitude)));
}

double BurstConfig::start_probability() const {
    uint32_t w = window_length();
    return w == 0 ? 0.0 : std::min(1.0, rate / static_cast<double>(w));
}

void CorrelatedChannel::validate() const {
    check_probability(probability, "correlated channel probability");
    if (kind == Kind::PairFlip) {
        if (measure_a == measure_b) {
            throw ValidationError("pair-flip channel needs two distinct measure qubits");
        }
    } else if (!(survival > 0.0 && survival < 1.0)) {
        throw ValidationError("persistent-flip survival probability must be in (0, 1)");
    }
}

void NoiseModel::validate() const {
    for (Component c : kAllComponents) {
        check_probability(rate(c), "rate of component " + std::string(component_name(c)));
    }
    if (bursts) {
        bursts->validate();
    }
    for (const auto &ch : correlated) {
        ch.validate();
    }
}

NoiseModel NoiseModel::scaled(double factor) const {
    NoiseModel out = *this;
    for (double &p : out.x) {
        p = std::min(0.5, p * factor);
    }
    return out;
}

NoiseModel NoiseModel::from_rates(double dd, double cz, double m, double r, double h, double i) {
    NoiseModel n;
    n.x = {dd, cz, m, r, h, i};
    return n;
}

NoiseModel NoiseModel::boundary_study() { return from_rates(4.4e-2, 5e-3, 2e-3, 5e-3, 1e-3, 7e-4); }

NoiseModel NoiseModel::bit_flip_budget() { return from_rates(5.1e-2, 6.6e-3, 1.9e-2, 5.0e-3, 1.1e-3, 8.4e-4); }

NoiseModel NoiseModel::phase_flip_budget() { return from_rates(4.1e-2, 6.6e-3, 1.9e-2, 5.0e-3, 1.1e-3, 5.8e-4); }

NoiseModel NoiseModel::surface2_model() { return from_rates(4.6e-2, 6.6e-3, 1.9e-2, 5.0e-3, 1.1e-3, 7.1e-4); }

}  // namespace repstab

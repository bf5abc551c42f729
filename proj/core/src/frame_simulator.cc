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

#include "repstab/frame_simulator.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <utility>

#include "repstab/errors.h"

namespace repstab {

namespace {

constexpr uint64_t kBurstCounter = uint64_t{1} << 62;

uint64_t component_counter(size_t c) { return uint64_t{c + 1} << 40; }
uint64_t channel_counter(size_t ch) { return uint64_t{ch + 16} << 40; }

uint64_t threshold32(double p) {
    if (p >= 1.0) {
        return uint64_t{1} << 32;
    }
    return static_cast<uint64_t>(p * 4294967296.0);
}

Channel channel_of(OpKind kind) {
    switch (kind) {
        case OpKind::CZ:
            return Channel::Depolarize2;
        case OpKind::M:
            return Channel::ResultFlip;
        case OpKind::R:
            return Channel::BitFlip;
        default:
            return Channel::Depolarize1;
    }
}

}  // namespace

double single_error_probability(const NoiseLocation &loc, const NoiseModel &noise) {
    double p = noise.rate(loc.component);
    switch (loc.channel) {
        case Channel::Depolarize1:
            return p / 3.0;
        case Channel::Depolarize2:
            return p / 15.0;
        default:
            return p;
    }
}

std::vector<uint32_t> stabilizer_qubits(const Circuit &circuit) {
    std::vector<uint32_t> out;
    for (const auto &tag : circuit.measurement_schedule) {
        if (tag.role == MeasureRole::Stabilizer && std::find(out.begin(), out.end(), tag.qubit) == out.end()) {
            out.push_back(tag.qubit);
        }
    }
    return out;
}

std::vector<uint32_t> final_data_qubits(const Circuit &circuit) {
    std::vector<uint32_t> out;
    for (const auto &tag : circuit.measurement_schedule) {
        if (tag.role == MeasureRole::FinalData) {
            out.push_back(tag.qubit);
        }
    }
    return out;
}

FrameSimulator::FrameSimulator(const Circuit &circuit, const NoiseModel &noise, uint64_t seed,
                               std::vector<JointChannel> joint)
    : circuit_(circuit), noise_(noise), rng_(seed), joint_(std::move(joint)) {
    circuit_.validate();
    noise_.validate();
    uint32_t meas = 0;
    for (uint32_t k = 0; k < circuit_.moments.size(); ++k) {
        for (const Op &op : circuit_.moments[k].ops) {
            Instr in{op.kind, op.q0, op.q1, -1, 0};
            if (op.kind == OpKind::M) {
                in.meas = meas++;
            }
            if (auto comp = component_of(op.noise)) {
                in.loc = static_cast<int32_t>(locations_.size());
                by_component_[static_cast<size_t>(*comp)].push_back(static_cast<uint32_t>(locations_.size()));
                locations_.push_back({k, op.kind, *comp, channel_of(op.kind), op.q0, op.q1, in.meas});
            }
            program_.push_back(in);
        }
    }
    masks_.assign(locations_.size(), {0, 0, 0, 0});
    frame_.x.assign(circuit_.qubit_count, 0);
    frame_.z.assign(circuit_.qubit_count, 0);
    for (const auto &ch : joint_) {
        if (!(ch.probability >= 0.0 && ch.probability <= 0.5)) {
            throw ValidationError("joint channel probability must be in [0, 0.5]");
        }
        for (const auto &group : ch.rounds) {
            for (auto [loc, pauli] : group) {
                if (loc >= locations_.size()) {
                    throw ValidationError("joint channel references a location outside the circuit");
                }
                if (pauli > 3 && locations_[loc].channel != Channel::Depolarize2) {
                    throw ValidationError("two-qubit Pauli at a single-qubit location");
                }
            }
        }
    }
}

void FrameSimulator::set_envelope(const std::array<double, kNumComponents> &envelope) {
    for (double e : envelope) {
        if (!(e >= 0.0 && e <= 0.5)) {
            throw ValidationError("sampling envelope must lie in [0, 0.5]");
        }
    }
    envelope_ = envelope;
}

double FrameSimulator::burst_factor(uint64_t shot) const {
    if (!noise_.bursts) {
        return 1.0;
    }
    const BurstConfig &b = *noise_.bursts;
    uint32_t window = b.window_length();
    uint64_t thr = threshold32(b.start_probability());
    double factor = 1.0;
    uint64_t lo = shot + 1 >= window ? shot + 1 - window : 0;
    for (uint64_t k = lo; k <= shot; ++k) {
        if (rng_(k, kBurstCounter)[0] < thr) {
            factor = std::max(factor, b.amplitude * std::exp(-static_cast<double>(shot - k) / b.decay_shots));
        }
    }
    return factor;
}

void FrameSimulator::inject(uint32_t loc, uint64_t lanes, uint8_t pauli) {
    auto &m = masks_[loc];
    for (int b = 0; b < 4; ++b) {
        if (pauli >> b & 1) {
            m[b] ^= lanes;
        }
    }
}

void FrameSimulator::sample_component(size_t c, uint64_t shot, uint64_t lane, double factor) {
    const auto &sites = by_component_[c];
    double p = std::min(0.5, noise_.x[c] * factor);
    if (sites.empty() || p <= 0.0) {
        return;
    }
    double q = factor > 1.0 ? p : std::max(p, envelope_[c]);
    uint64_t keep = threshold32(p / q);
    double log1mq = std::log1p(-q);
    uint64_t base = component_counter(c);
    Channel channel = locations_[sites[0]].channel;
    double n_sites = static_cast<double>(sites.size());
    double pos = -1.0;
    for (uint64_t k = 0;; ++k) {
        auto b = rng_(shot, base | k);
        uint64_t u53 = (uint64_t{b[0]} << 21) | (b[1] >> 11);
        double u = static_cast<double>(u53 + 1) * 0x1.0p-53;
        pos += std::floor(std::log(u) / log1mq) + 1.0;
        if (pos >= n_sites) {
            break;
        }
        if (b[2] >= keep) {
            continue;
        }
        uint8_t pauli = 1;
        if (channel == Channel::Depolarize1) {
            pauli = static_cast<uint8_t>(1 + scale_to(b[3], 3));
        } else if (channel == Channel::Depolarize2) {
            pauli = static_cast<uint8_t>(1 + scale_to(b[3], 15));
        }
        inject(sites[static_cast<size_t>(pos)], lane, pauli);
    }
}

void FrameSimulator::sample_channels(uint64_t shot, uint64_t lane) {
    for (size_t ch = 0; ch < joint_.size(); ++ch) {
        const JointChannel &c = joint_[ch];
        uint64_t thr = threshold32(c.probability);
        if (c.kind == JointChannel::Kind::Independent) {
            for (size_t t = 0; t < c.rounds.size(); ++t) {
                if (rng_(shot, channel_counter(ch) | t)[0] < thr) {
                    for (auto [loc, pauli] : c.rounds[t]) {
                        inject(loc, lane, pauli);
                    }
                }
            }
        } else {
            uint64_t survive = threshold32(c.survival);
            bool on = false;
            for (size_t t = 0; t < c.rounds.size(); ++t) {
                auto b = rng_(shot, channel_counter(ch) | t);
                if (!on) {
                    on = b[0] < thr;
                }
                if (on) {
                    for (auto [loc, pauli] : c.rounds[t]) {
                        (void)pauli;
                        inject(loc, lane, static_cast<uint8_t>(b[1] & 3));
                    }
                    on = b[2] < survive;
                }
            }
        }
    }
}

void FrameSimulator::sample(uint64_t first_shot, size_t n_shots, SampleBlock &out) {
    if (n_shots == 0 || n_shots > 64) {
        throw ValidationError("sample block must hold 1..64 shots");
    }
    out.first_shot = first_shot;
    out.n_shots = n_shots;
    out.burst = 0;
    out.flips.assign(circuit_.measurement_count(), 0);
    for (size_t lane = 0; lane < n_shots; ++lane) {
        uint64_t shot = first_shot + lane;
        uint64_t bit = uint64_t{1} << lane;
        double factor = burst_factor(shot);
        if (factor > 1.0) {
            out.burst |= bit;
        }
        for (size_t c = 0; c < kNumComponents; ++c) {
            sample_component(c, shot, bit, factor);
        }
        sample_channels(shot, bit);
    }
    run(out.flips.data());
}

void FrameSimulator::run(uint64_t *flips) {
    std::fill(frame_.x.begin(), frame_.x.end(), 0);
    std::fill(frame_.z.begin(), frame_.z.end(), 0);
    uint64_t *x = frame_.x.data();
    uint64_t *z = frame_.z.data();
    for (const Instr &in : program_) {
        switch (in.kind) {
            case OpKind::H:
                std::swap(x[in.q0], z[in.q0]);
                break;
            case OpKind::CZ:
                z[in.q0] ^= x[in.q1];
                z[in.q1] ^= x[in.q0];
                break;
            case OpKind::M: {
                uint64_t f = x[in.q0];
                if (in.loc >= 0) {
                    f ^= masks_[in.loc][0];
                    masks_[in.loc][0] = 0;
                }
                flips[in.meas] = f;
                continue;
            }
            case OpKind::R:
                x[in.q0] = 0;
                z[in.q0] = 0;
                break;
            case OpKind::X:
            case OpKind::Idle:
                break;
        }
        if (in.loc >= 0) {
            auto &m = masks_[in.loc];
            x[in.q0] ^= m[0];
            z[in.q0] ^= m[1];
            if (in.kind == OpKind::CZ) {
                x[in.q1] ^= m[2];
                z[in.q1] ^= m[3];
            }
            m = {0, 0, 0, 0};
        }
    }
}

FrameInjector::FrameInjector(const Circuit &circuit) : sim_(circuit, NoiseModel::zero(), 0) {}

std::vector<uint64_t> FrameInjector::run() {
    std::vector<uint64_t> flips(sim_.measurement_count(), 0);
    sim_.run(flips.data());
    return flips;
}

std::vector<SingleError> enumerate_single_errors(const Circuit &circuit) {
    FrameSimulator sim(circuit, NoiseModel::zero(), 0);
    std::vector<SingleError> out;
    for (uint32_t l = 0; l < sim.locations_.size(); ++l) {
        Channel ch = sim.locations_[l].channel;
        uint8_t n = ch == Channel::Depolarize1 ? 3 : ch == Channel::Depolarize2 ? 15 : 1;
        for (uint8_t p = 1; p <= n; ++p) {
            out.push_back({l, p, {}});
        }
    }
    std::vector<uint64_t> flips(sim.measurement_count());
    for (size_t base = 0; base < out.size(); base += 64) {
        size_t count = std::min<size_t>(64, out.size() - base);
        for (size_t lane = 0; lane < count; ++lane) {
            sim.inject(out[base + lane].location, uint64_t{1} << lane, out[base + lane].pauli);
        }
        sim.run(flips.data());
        for (uint32_t m = 0; m < flips.size(); ++m) {
            for (uint64_t w = flips[m]; w; w &= w - 1) {
                out[base + std::countr_zero(w)].flipped.push_back(m);
            }
        }
    }
    return out;
}

}  // namespace repstab

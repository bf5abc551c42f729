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

#include "repstab/codes.h"

#include "repstab/errors.h"
#include "repstab/rng.h"

namespace repstab {

std::string_view family_name(CodeFamily f) {
    switch (f) {
        case CodeFamily::RepBit:
            return "rep-bit";
        case CodeFamily::RepPhase:
            return "rep-phase";
        case CodeFamily::Surface2:
            return "surface2";
    }
    return "?";
}

CodeFamily parse_family(std::string_view name) {
    for (CodeFamily f : {CodeFamily::RepBit, CodeFamily::RepPhase, CodeFamily::Surface2}) {
        if (family_name(f) == name) {
            return f;
        }
    }
    throw ValidationError("unknown code family '" + std::string(name) + "'");
}

void CodeSpec::validate() const {
    if (family == CodeFamily::Surface2) {
        if (distance != 2) {
            throw ValidationError("surface2 has distance 2");
        }
    } else if (distance < 3 || distance > 11 || distance % 2 == 0) {
        throw ValidationError("repetition distance must be odd in [3, 11], got " + std::to_string(distance));
    }
    if (rounds < 1 || rounds > 1000) {
        throw ValidationError("rounds must be in [1, 1000]");
    }
    if (init) {
        if (init->size() != data_count()) {
            throw ValidationError("init string has " + std::to_string(init->size()) + " bits, code has " +
                                  std::to_string(data_count()) + " data qubits");
        }
        for (uint8_t b : *init) {
            if (b > 1) {
                throw ValidationError("init string must be binary");
            }
        }
    }
    if (init_batch == 0) {
        throw ValidationError("init batch size must be positive");
    }
}

CodeSpec CodeSpec::repetition(CodeFamily family, uint32_t d, uint32_t rounds) {
    CodeSpec s;
    s.family = family;
    s.distance = d;
    s.rounds = rounds;
    s.validate();
    return s;
}

CodeSpec CodeSpec::surface2(Basis basis, uint32_t rounds) {
    CodeSpec s;
    s.family = CodeFamily::Surface2;
    s.distance = 2;
    s.rounds = rounds;
    s.basis = basis;
    s.validate();
    return s;
}

std::vector<uint8_t> init_for_shot(const CodeSpec &spec, uint64_t seed, uint64_t shot) {
    if (spec.init) {
        return *spec.init;
    }
    Philox4x32 rng(derive_seed(seed, 0x1417));
    uint64_t batch = shot / spec.init_batch;
    std::vector<uint8_t> bits(spec.data_count());
    for (size_t k = 0; k < bits.size(); ++k) {
        bits[k] = rng(batch, k / 128)[(k / 32) % 4] >> (k % 32) & 1;
    }
    return bits;
}

bool CodeLayout::masked(uint32_t i) const {
    uint32_t s = node_s(i), t = node_t(i);
    return (t == 0 && first_masked[s]) || (t == rounds && last_masked[s]);
}

uint64_t CodeLayout::support_mask(uint32_t s) const {
    uint64_t m = 0;
    for (uint32_t k : supports[s]) {
        m |= uint64_t{1} << k;
    }
    return m;
}

uint64_t CodeLayout::logical_mask() const {
    uint64_t m = 0;
    for (uint32_t k : logical_support) {
        m |= uint64_t{1} << k;
    }
    return m;
}

CodeLayout layout_of(const CodeSpec &spec) {
    spec.validate();
    CodeLayout l;
    l.family = spec.family;
    l.basis = spec.basis;
    l.distance = spec.distance;
    l.rounds = spec.rounds;
    l.n_measure = spec.measure_count();
    l.n_data = spec.data_count();
    if (spec.family == CodeFamily::Surface2) {
        l.supports = {{0, 1}, {0, 1, 2, 3}, {2, 3}};
        bool z = spec.basis == Basis::Z;
        l.logical_support = z ? std::vector<uint32_t>{0, 2} : std::vector<uint32_t>{0, 1};
        l.first_masked = {!z, z, !z};
        l.last_masked = {!z, z, !z};
    } else {
        for (uint32_t s = 0; s < l.n_measure; ++s) {
            l.supports.push_back({s, s + 1});
        }
        l.logical_support = {0};
        l.first_masked.assign(l.n_measure, 0);
        l.last_masked.assign(l.n_measure, 0);
        if (spec.family == CodeFamily::RepBit && spec.rounds % 2 == 1) {
            l.pulse_flips = (l.n_data == 64 ? ~uint64_t{0} : (uint64_t{1} << l.n_data) - 1);
        }
    }
    return l;
}

namespace {

class CircuitBuilder {
   public:
    explicit CircuitBuilder(size_t n) { c_.qubit_count = n; }

    Moment &moment() { return c_.moments.emplace_back(); }

    /// Adds idles of class `cls` for every qubit in [0, n) not touched by `m`.
    void fill_idle(Moment &m, NoiseClass cls) {
        std::vector<uint8_t> used(c_.qubit_count, 0);
        for (const Op &op : m.ops) {
            used[op.q0] = 1;
            if (op.kind == OpKind::CZ) {
                used[op.q1] = 1;
            }
        }
        for (uint32_t q = 0; q < c_.qubit_count; ++q) {
            if (!used[q]) {
                m.ops.push_back(Op::idle(q, cls));
            }
        }
    }

    void measure(Moment &m, uint32_t q, uint32_t round, MeasureRole role) {
        m.ops.push_back(Op::m(q));
        c_.measurement_schedule.push_back({q, round, role});
    }

    Circuit finish() {
        c_.validate();
        return std::move(c_);
    }

   private:
    Circuit c_;
};

void prepare(CircuitBuilder &b, size_t n, const std::vector<uint32_t> &data, const std::vector<uint8_t> &init) {
    Moment &r = b.moment();
    for (uint32_t q = 0; q < n; ++q) {
        r.ops.push_back(Op::r(q));
    }
    Moment &x = b.moment();
    for (size_t k = 0; k < data.size(); ++k) {
        if (init[k]) {
            x.ops.push_back(Op::x(data[k]));
        }
    }
}

Circuit repetition_circuit(const CodeSpec &spec, const std::vector<uint8_t> &init) {
    const uint32_t d = spec.distance;
    const uint32_t n = 2 * d - 1;
    const bool phase = spec.family == CodeFamily::RepPhase;
    auto data = [](uint32_t k) { return 2 * k; };
    auto meas = [](uint32_t s) { return 2 * s + 1; };
    std::vector<uint32_t> data_qubits;
    for (uint32_t k = 0; k < d; ++k) {
        data_qubits.push_back(data(k));
    }
    CircuitBuilder b(n);
    prepare(b, n, data_qubits, init);
    for (uint32_t t = 0; t < spec.rounds; ++t) {
        {
            // Phase-flip data come back from the X basis; in round 0 this
            // Hadamard cancels the one that would prepare |+>/|->.
            Moment &m = b.moment();
            for (uint32_t s = 0; s + 1 < d; ++s) {
                m.ops.push_back(Op::h(meas(s)));
            }
            if (phase && t > 0) {
                for (uint32_t k = 0; k < d; ++k) {
                    m.ops.push_back(Op::h(data(k)));
                }
            }
            b.fill_idle(m, NoiseClass::I);
        }
        for (uint32_t layer = 0; layer < 2; ++layer) {
            Moment &m = b.moment();
            for (uint32_t s = 0; s + 1 < d; ++s) {
                m.ops.push_back(Op::cz(meas(s), data(s + layer)));
            }
            b.fill_idle(m, NoiseClass::I);
        }
        const bool last = t + 1 == spec.rounds;
        {
            // In the last round the data stay put: the X-basis readout would
            // undo this Hadamard.
            Moment &m = b.moment();
            for (uint32_t s = 0; s + 1 < d; ++s) {
                m.ops.push_back(Op::h(meas(s)));
            }
            if (phase && !last) {
                for (uint32_t k = 0; k < d; ++k) {
                    m.ops.push_back(Op::h(data(k)));
                }
            }
            b.fill_idle(m, NoiseClass::I);
        }
        if (!phase) {
            Moment &m = b.moment();
            for (uint32_t k = 0; k < d; ++k) {
                m.ops.push_back(Op::x(data(k)));
            }
        }
        Moment &m = b.moment();
        for (uint32_t s = 0; s + 1 < d; ++s) {
            b.measure(m, meas(s), t, MeasureRole::Stabilizer);
        }
        if (last) {
            // Final data readout shares the last measurement window, so the
            // data never idle through it.
            for (uint32_t k = 0; k < d; ++k) {
                b.measure(m, data(k), spec.rounds, MeasureRole::FinalData);
            }
        } else {
            for (uint32_t k = 0; k < d; ++k) {
                m.ops.push_back(Op::idle(data(k), NoiseClass::DD));
            }
            Moment &r = b.moment();
            for (uint32_t s = 0; s + 1 < d; ++s) {
                r.ops.push_back(Op::r(meas(s)));
            }
        }
    }
    return b.finish();
}

Circuit surface2_circuit(const CodeSpec &spec, const std::vector<uint8_t> &init) {
    constexpr uint32_t A = 4, B = 5, C = 6;
    const std::vector<uint32_t> data{0, 1, 2, 3};
    CircuitBuilder b(7);
    prepare(b, 7, data, init);
    const bool xbasis = spec.basis == Basis::X;
    if (xbasis) {
        Moment &m = b.moment();
        for (uint32_t q : data) {
            m.ops.push_back(Op::h(q));
        }
    }
    auto hadamards = [&](std::initializer_list<uint32_t> qs) {
        Moment &m = b.moment();
        for (uint32_t q : qs) {
            m.ops.push_back(Op::h(q));
        }
        b.fill_idle(m, NoiseClass::I);
    };
    auto czs = [&](std::initializer_list<std::pair<uint32_t, uint32_t>> pairs) {
        Moment &m = b.moment();
        for (auto [a, q] : pairs) {
            m.ops.push_back(Op::cz(a, q));
        }
        b.fill_idle(m, NoiseClass::I);
    };
    // Each data qubit meets the X-type ancilla B inside a Hadamard sandwich and
    // the Z-type ancillas outside it; shared qubits keep the same A/B and C/B
    // order so the interleaved checks commute.
    for (uint32_t t = 0; t < spec.rounds; ++t) {
        hadamards({A, B, C, 0});
        czs({{B, 0}, {C, 2}});
        hadamards({0, 1, 2});
        czs({{B, 1}, {A, 0}, {C, 3}});
        hadamards({1, 3});
        czs({{B, 2}, {A, 1}});
        czs({{B, 3}});
        const bool last = t + 1 == spec.rounds;
        if (last && xbasis) {
            // d2 and d3 leave the X-check sandwich already in the X basis.
            hadamards({A, B, C, 0, 1});
        } else {
            hadamards({A, B, C, 2, 3});
        }
        Moment &m = b.moment();
        for (uint32_t a : {A, B, C}) {
            b.measure(m, a, t, MeasureRole::Stabilizer);
        }
        if (last) {
            for (uint32_t q : data) {
                b.measure(m, q, spec.rounds, MeasureRole::FinalData);
            }
        } else {
            for (uint32_t q : data) {
                m.ops.push_back(Op::idle(q, NoiseClass::DD));
            }
            Moment &r = b.moment();
            for (uint32_t a : {A, B, C}) {
                r.ops.push_back(Op::r(a));
            }
        }
    }
    return b.finish();
}

}  // namespace

Circuit build_circuit(const CodeSpec &spec, const std::vector<uint8_t> &init) {
    spec.validate();
    if (init.size() != spec.data_count()) {
        throw ValidationError("init string length does not match the data-qubit count");
    }
    if (spec.family == CodeFamily::Surface2) {
        return surface2_circuit(spec, init);
    }
    return repetition_circuit(spec, init);
}

Circuit build_repetition(const CodeSpec &spec) {
    if (spec.family == CodeFamily::Surface2) {
        throw ValidationError("build_repetition needs a repetition-code family");
    }
    return build_circuit(spec, spec.init.value_or(std::vector<uint8_t>(spec.data_count(), 0)));
}

Circuit build_surface2(const CodeSpec &spec) {
    if (spec.family != CodeFamily::Surface2) {
        throw ValidationError("build_surface2 needs family surface2");
    }
    return build_circuit(spec, spec.init.value_or(std::vector<uint8_t>(4, 0)));
}

std::vector<SubsampleMap> subsample_maps(uint32_t d, uint32_t d_s) {
    if (d % 2 == 0 || d_s % 2 == 0) {
        throw ValidationError("subsampling needs odd distances");
    }
    if (d_s > d || d_s < 1) {
        throw ValidationError("child distance must not exceed the parent distance");
    }
    std::vector<SubsampleMap> maps;
    for (uint32_t o = 0; o + d_s <= d; ++o) {
        maps.push_back({d, d_s, o});
    }
    return maps;
}

std::vector<JointChannel> compile_channels(const CodeSpec &spec, const Circuit &circuit, const NoiseModel &noise) {
    if (noise.correlated.empty()) {
        return {};
    }
    const bool rep = spec.family != CodeFamily::Surface2;
    const uint32_t n_data = spec.data_count();
    auto data_qubit = [&](uint32_t k) { return rep ? 2 * k : k; };
    // DD idle locations per data qubit, in round order.
    std::vector<std::vector<uint32_t>> dd(n_data);
    uint32_t loc = 0;
    for (const Moment &m : circuit.moments) {
        for (const Op &op : m.ops) {
            if (!component_of(op.noise)) {
                continue;
            }
            if (op.noise == NoiseClass::DD) {
                for (uint32_t k = 0; k < n_data; ++k) {
                    if (data_qubit(k) == op.q0) {
                        dd[k].push_back(loc);
                    }
                }
            }
            ++loc;
        }
    }
    std::vector<JointChannel> out;
    for (const CorrelatedChannel &c : noise.correlated) {
        c.validate();
        JointChannel j;
        j.probability = c.probability;
        if (c.kind == CorrelatedChannel::Kind::PairFlip) {
            if (!rep) {
                throw ValidationError("pair-flip channels are defined for repetition codes only");
            }
            uint32_t a = std::min(c.measure_a, c.measure_b), b = std::max(c.measure_a, c.measure_b);
            if (b >= spec.measure_count()) {
                throw ValidationError("pair-flip measure qubit out of range");
            }
            // Data a+1..b flip stabilizers a and b only.
            uint8_t pauli = spec.family == CodeFamily::RepBit ? kPauliX : kPauliZ;
            j.rounds.resize(dd[0].size());
            for (size_t t = 0; t < j.rounds.size(); ++t) {
                for (uint32_t k = a + 1; k <= b; ++k) {
                    j.rounds[t].push_back({dd[k][t], pauli});
                }
            }
        } else {
            if (c.data_qubit >= n_data) {
                throw ValidationError("persistent-flip data qubit out of range");
            }
            j.kind = JointChannel::Kind::Persistent;
            j.survival = c.survival;
            for (uint32_t l : dd[c.data_qubit]) {
                j.rounds.push_back({{l, kPauliX}});
            }
        }
        out.push_back(std::move(j));
    }
    return out;
}

}  // namespace repstab

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

#include "repstab/records.h"

#include <algorithm>
#include <fstream>
#include <map>

#include "repstab/errors.h"
#include "repstab/frame_simulator.h"
#include "repstab/tableau.h"

namespace repstab {

namespace {

constexpr size_t kHeaderBytes = 18;

void put16(std::vector<uint8_t> &out, uint16_t v) {
    out.push_back(static_cast<uint8_t>(v));
    out.push_back(static_cast<uint8_t>(v >> 8));
}

void put32(std::vector<uint8_t> &out, uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }
}

uint16_t get16(const uint8_t *p) { return static_cast<uint16_t>(p[0] | p[1] << 8); }
uint32_t get32(const uint8_t *p) {
    return uint32_t{p[0]} | uint32_t{p[1]} << 8 | uint32_t{p[2]} << 16 | uint32_t{p[3]} << 24;
}

uint16_t narrow16(uint32_t v, const char *what) {
    if (v > 0xFFFF) {
        throw ValidationError(std::string(what) + " does not fit the archive header");
    }
    return static_cast<uint16_t>(v);
}

// Schedule index -> bit position in a ShotRecord (stabilizers first, then data).
std::vector<uint32_t> record_slots(const Circuit &c, const RecordShape &shape) {
    auto stab = stabilizer_qubits(c);
    std::vector<uint32_t> slots;
    uint32_t data = 0;
    for (const auto &tag : c.measurement_schedule) {
        if (tag.role == MeasureRole::Stabilizer) {
            uint32_t s = static_cast<uint32_t>(std::find(stab.begin(), stab.end(), tag.qubit) - stab.begin());
            slots.push_back(tag.round * shape.n_measure + s);
        } else {
            slots.push_back(shape.n_measure * shape.n_rounds + data++);
        }
    }
    return slots;
}

}  // namespace

std::vector<ShotRecord> sample_shots(const CodeSpec &spec, const NoiseModel &noise, uint64_t n_shots, uint64_t seed,
                                     uint64_t first_shot) {
    if (n_shots < 1) {
        throw ValidationError("n_shots must be at least 1");
    }
    spec.validate();
    RecordShape shape = shape_of(spec);
    Circuit base = build_circuit(spec, std::vector<uint8_t>(spec.data_count(), 0));
    FrameSimulator sim(base, noise, seed, compile_channels(spec, base, noise));
    auto slots = record_slots(base, shape);
    const uint32_t n_stab = shape.n_measure * shape.n_rounds;

    std::vector<ShotRecord> out(n_shots);
    std::map<std::vector<uint8_t>, std::vector<uint8_t>> references;
    SampleBlock block;
    for (uint64_t done = 0; done < n_shots; done += 64) {
        size_t n = static_cast<size_t>(std::min<uint64_t>(64, n_shots - done));
        sim.sample(first_shot + done, n, block);
        for (size_t lane = 0; lane < n; ++lane) {
            uint64_t shot = first_shot + done + lane;
            auto init = init_for_shot(spec, seed, shot);
            auto it = references.find(init);
            if (it == references.end()) {
                it = references.emplace(init, reference_run(build_circuit(spec, init), derive_seed(seed, 0x5eed)))
                         .first;
            }
            const auto &ref = it->second;
            ShotRecord &r = out[done + lane];
            r.shot = shot;
            r.stabilizer_bits.assign(n_stab, 0);
            r.final_data_bits.assign(shape.n_data, 0);
            r.burst_flag = block.burst >> lane & 1;
            for (size_t m = 0; m < slots.size(); ++m) {
                uint8_t bit = ref[m] ^ static_cast<uint8_t>(block.flips[m] >> lane & 1);
                if (slots[m] < n_stab) {
                    r.stabilizer_bits[slots[m]] = bit;
                } else {
                    r.final_data_bits[slots[m] - n_stab] = bit;
                }
            }
        }
    }
    return out;
}

namespace detail {

std::vector<uint8_t> encode_header(const ArchiveHeader &h) {
    std::vector<uint8_t> out{'R', 'S', 'T', 'B'};
    put16(out, h.version);
    put32(out, h.n_shots);
    put16(out, narrow16(h.shape.n_measure, "n_measure"));
    put16(out, narrow16(h.shape.n_rounds, "n_rounds"));
    put16(out, narrow16(h.shape.n_data, "n_data"));
    put16(out, h.flags);
    return out;
}

ArchiveHeader decode_header(const uint8_t *p, size_t n) {
    if (n < kHeaderBytes || p[0] != 'R' || p[1] != 'S' || p[2] != 'T' || p[3] != 'B') {
        throw IoError("not an RSTB archive");
    }
    ArchiveHeader h;
    h.version = get16(p + 4);
    if (h.version != kArchiveVersion) {
        throw IoError("unsupported archive version " + std::to_string(h.version));
    }
    h.n_shots = get32(p + 6);
    h.shape.n_measure = get16(p + 10);
    h.shape.n_rounds = get16(p + 12);
    h.shape.n_data = get16(p + 14);
    h.flags = get16(p + 16);
    return h;
}

}  // namespace detail

void write_shot_archive(const std::string &path, const RecordShape &shape, const std::vector<ShotRecord> &shots) {
    ArchiveHeader h;
    h.n_shots = static_cast<uint32_t>(shots.size());
    h.shape = shape;
    auto bytes = detail::encode_header(h);
    const uint32_t n_stab = shape.n_measure * shape.n_rounds;
    const size_t stride = shape.bytes_per_shot();
    for (const auto &r : shots) {
        if (r.stabilizer_bits.size() != n_stab || r.final_data_bits.size() != shape.n_data) {
            throw ValidationError("shot " + std::to_string(r.shot) + " does not match the archive shape");
        }
        size_t base = bytes.size();
        bytes.resize(base + stride, 0);
        auto set = [&](uint32_t bit, bool v) {
            if (v) {
                bytes[base + bit / 8] |= static_cast<uint8_t>(1u << (bit % 8));
            }
        };
        for (uint32_t i = 0; i < n_stab; ++i) {
            set(i, r.stabilizer_bits[i]);
        }
        for (uint32_t k = 0; k < shape.n_data; ++k) {
            set(n_stab + k, r.final_data_bits[k]);
        }
        set(n_stab + shape.n_data, r.burst_flag);
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw IoError("cannot open " + path + " for writing");
    }
    f.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) {
        throw IoError("write failed for " + path);
    }
}

namespace {

std::vector<uint8_t> slurp(const std::string &path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw IoError("cannot open " + path);
    }
    return std::vector<uint8_t>(std::istreambuf_iterator<char>(f), {});
}

}  // namespace

ArchiveHeader read_archive_header(const std::string &path) {
    auto bytes = slurp(path);
    return detail::decode_header(bytes.data(), bytes.size());
}

std::vector<ShotRecord> read_shot_archive(const std::string &path, RecordShape *shape_out) {
    auto bytes = slurp(path);
    ArchiveHeader h = detail::decode_header(bytes.data(), bytes.size());
    if (h.flags & kFlagDetections) {
        throw IoError(path + " holds detection events, not shot records");
    }
    const RecordShape &shape = h.shape;
    const size_t stride = shape.bytes_per_shot();
    if (bytes.size() != kHeaderBytes + stride * h.n_shots) {
        throw IoError(path + " is truncated or has trailing bytes");
    }
    const uint32_t n_stab = shape.n_measure * shape.n_rounds;
    std::vector<ShotRecord> shots(h.n_shots);
    for (uint32_t j = 0; j < h.n_shots; ++j) {
        const uint8_t *p = bytes.data() + kHeaderBytes + stride * j;
        auto get = [&](uint32_t bit) { return static_cast<uint8_t>(p[bit / 8] >> (bit % 8) & 1); };
        ShotRecord &r = shots[j];
        r.shot = j;
        r.stabilizer_bits.resize(n_stab);
        r.final_data_bits.resize(shape.n_data);
        for (uint32_t i = 0; i < n_stab; ++i) {
            r.stabilizer_bits[i] = get(i);
        }
        for (uint32_t k = 0; k < shape.n_data; ++k) {
            r.final_data_bits[k] = get(n_stab + k);
        }
        r.burst_flag = get(n_stab + shape.n_data);
    }
    if (shape_out) {
        *shape_out = shape;
    }
    return shots;
}

}  // namespace repstab

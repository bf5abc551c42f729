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

#ifndef REPSTAB_RECORDS_H
#define REPSTAB_RECORDS_H

#include <cstdint>
#include <string>
#include <vector>

#include "repstab/codes.h"
#include "repstab/noise.h"

namespace repstab {

/// Raw readout of one shot.
struct ShotRecord {
    uint64_t shot = 0;
    std::vector<uint8_t> stabilizer_bits;  // index t * n_measure + s
    std::vector<uint8_t> final_data_bits;
    bool burst_flag = false;  // simulation ground truth

    bool operator==(const ShotRecord &) const = default;
};

struct RecordShape {
    uint32_t n_measure = 0;
    uint32_t n_rounds = 0;
    uint32_t n_data = 0;

    bool operator==(const RecordShape &) const = default;
    uint32_t bits_per_shot() const { return n_measure * n_rounds + n_data + 1; }
    uint32_t bytes_per_shot() const { return (bits_per_shot() + 7) / 8; }
};

inline RecordShape shape_of(const CodeSpec &spec) {
    return {spec.measure_count(), spec.rounds, spec.data_count()};
}

/// Simulates `n_shots` shots of `spec` starting at shot index `first_shot`.
///
/// Each shot is the noiseless reference for its batch's initialization string
/// XOR the sampled Pauli-frame flips.
std::vector<ShotRecord> sample_shots(const CodeSpec &spec, const NoiseModel &noise, uint64_t n_shots, uint64_t seed,
                                     uint64_t first_shot = 0);

/// Bit-packed shot archive.
///
/// Header (18 bytes, little-endian): magic "RSTB", version u16, n_shots u32,
/// n_measure u16, n_rounds u16, n_data u16, flags u16. Each shot then takes
/// ceil(bits/8) bytes, bits LSB-first: stabilizer bits round-major, final data
/// bits, burst flag.
inline constexpr uint16_t kArchiveVersion = 1;
inline constexpr uint16_t kFlagDetections = 1;

struct ArchiveHeader {
    uint16_t version = kArchiveVersion;
    uint32_t n_shots = 0;
    RecordShape shape;
    uint16_t flags = 0;
};

void write_shot_archive(const std::string &path, const RecordShape &shape, const std::vector<ShotRecord> &shots);
std::vector<ShotRecord> read_shot_archive(const std::string &path, RecordShape *shape = nullptr);

ArchiveHeader read_archive_header(const std::string &path);

namespace detail {
std::vector<uint8_t> encode_header(const ArchiveHeader &h);
ArchiveHeader decode_header(const uint8_t *bytes, size_t n);
}  // namespace detail

}  // namespace repstab

#endif

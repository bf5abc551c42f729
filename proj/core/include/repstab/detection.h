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

#ifndef REPSTAB_DETECTION_H
#define REPSTAB_DETECTION_H

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "repstab/codes.h"
#include "repstab/frame_simulator.h"
#include "repstab/noise.h"
#include "repstab/records.h"

namespace repstab {

/// Detection events of one shot.
struct DetectionTensor {
    uint64_t shot = 0;
    std::vector<uint32_t> events;  // fired, unmasked nodes in ascending order
    uint64_t final_flips = 0;      // final data readout XOR its noiseless value
    bool observable = false;       // logical-operator parity of final_flips
    bool burst_flag = false;

    bool operator==(const DetectionTensor &) const = default;
};

struct DetectionSet {
    CodeLayout layout;
    std::vector<DetectionTensor> shots;
};

/// x_{s,t} = m_{s,t} XOR m_{s,t-1}; round 0 compares against the parity of the
/// initialization string, round N_r against the parity of the final data
/// readout. Nodes that cannot be compared are masked and never fire.
DetectionSet extract_detections(const std::vector<ShotRecord> &shots, const CodeSpec &spec, uint64_t seed);

/// Appends the detection tensors of a bit-sliced block of measurement flips.
/// Requires the schedule order produced by the code builders (round-major
/// stabilizer readouts, then final data).
void append_detections(const SampleBlock &block, const CodeLayout &layout, std::vector<DetectionTensor> &out);

/// Frame sampler that emits detection tensors directly.
class DetectionSampler {
   public:
    DetectionSampler(const CodeSpec &spec, const NoiseModel &noise, uint64_t seed);
    void set_envelope(const std::array<double, kNumComponents> &envelope) { sim_.set_envelope(envelope); }
    /// Appends shots [first, first + n) to `out`.
    void sample(uint64_t first, uint64_t n, std::vector<DetectionTensor> &out);
    DetectionSet sample_set(uint64_t n, uint64_t first = 0);
    const CodeLayout &layout() const { return layout_; }

   private:
    CodeLayout layout_;
    FrameSimulator sim_;
    SampleBlock block_;
};

/// Detection event fractions.
struct DefReport {
    std::vector<double> per_node;
    std::vector<double> per_round;    // t in [0, N_r], unmasked nodes only
    std::vector<double> per_measure;  // averaged over rounds
    std::vector<double> per_shot;
    /// Mean over rounds 1..N_r-1 (all rounds when fewer than three).
    double bulk() const;
};

DefReport def_report(const DetectionSet &set);

struct BurstFilterResult {
    DetectionSet kept;
    std::vector<std::pair<uint64_t, uint64_t>> removed;  // [first, last] shot indices
    double threshold = 0;
    size_t removed_count = 0;
};

/// Removes high-energy bursts: a shot is flagged when its detection fraction
/// exceeds median + k_sigma * IQR / 1.349, and removal runs from a flagged
/// shot through `cooldown` consecutive unflagged shots.
BurstFilterResult burst_filter(const DetectionSet &set, double k_sigma, uint32_t cooldown);

/// A single circuit error with its detection-level effect.
struct ErrorMechanism {
    uint32_t location;
    uint8_t pauli;
    Component component;
    double probability;
    std::vector<uint32_t> nodes;
    uint64_t final_flips;
    bool observable;
};

/// All single errors of `spec` that flip at least one node or data readout.
std::vector<ErrorMechanism> error_mechanisms(const CodeSpec &spec, const NoiseModel &noise);

/// Detection archive: RSTB header with flags bit 0 set; per shot, node bits,
/// mask bits, final-data flip bits, then the burst flag.
void write_detection_archive(const std::string &path, const DetectionSet &set);
DetectionSet read_detection_archive(const std::string &path, const CodeSpec &spec);

/// Restricts a repetition-code tensor to a contiguous sub-chain.
DetectionTensor subsample(const DetectionTensor &t, const CodeLayout &parent, const CodeLayout &child,
                          const SubsampleMap &map);

}  // namespace repstab

#endif

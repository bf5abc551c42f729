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

#ifndef REPSTAB_EXPERIMENT_H
#define REPSTAB_EXPERIMENT_H

#include <cstdint>
#include <vector>

#include "repstab/analysis.h"
#include "repstab/codes.h"
#include "repstab/decoder.h"
#include "repstab/noise.h"

namespace repstab {

/// Repetition-code memory experiments over distances and round counts.
struct SweepConfig {
    CodeFamily family = CodeFamily::RepPhase;
    NoiseModel noise;
    std::vector<uint32_t> distances{3, 5, 7, 9, 11};
    std::vector<uint32_t> rounds{1, 2, 3, 4, 5, 6, 8, 10, 12, 15, 20, 25, 30, 40, 50};
    uint64_t shots = 20000;
    uint64_t seed = 1;
    std::vector<Weighting> weightings{Weighting::FirstPrinciples};
    /// Training data for bootstrap and p_ij weights; 0 rounds means the
    /// largest entry of `rounds`.
    uint32_t training_rounds = 0;
    uint64_t training_shots = 20000;
    uint32_t min_rounds = 10;
    std::vector<uint32_t> exclude{3};
    unsigned workers = 1;

    void validate() const;
};

struct SweepPoint {
    uint32_t d = 0;
    uint32_t rounds = 0;
    Weighting weighting = Weighting::FirstPrinciples;
    LogicalRate rate;
};

struct WeightingFit {
    Weighting weighting = Weighting::FirstPrinciples;
    std::vector<EpsFit> eps;  // one per distance, in config order
    FitResult lambda;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    std::vector<WeightingFit> fits;  // one per weighting, in config order
    const WeightingFit &fit(Weighting w) const;
    /// P_error points of one (weighting, distance).
    std::vector<RoundPoint> curve(Weighting w, uint32_t d) const;
};

SweepResult run_memory_sweep(const SweepConfig &cfg);

/// Graph for `spec` under weighting `w`; bootstrap and p_ij are trained on
/// `training` (same distance, any round count) and retargeted.
MatchingGraph weighting_graph(Weighting w, const CodeSpec &spec, const NoiseModel &noise,
                              const DetectionSet *training);

}  // namespace repstab

#endif

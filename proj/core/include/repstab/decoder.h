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

#ifndef REPSTAB_DECODER_H
#define REPSTAB_DECODER_H

#include <cstdint>
#include <memory>
#include <unordered_map>
#include <utility>
#include <vector>

#include "repstab/codes.h"
#include "repstab/correlation.h"
#include "repstab/detection.h"
#include "repstab/noise.h"

namespace repstab {

struct GraphEdge {
    uint32_t a = 0;
    uint32_t b = kBoundaryNode;
    EdgeClass cls = EdgeClass::S;
    int32_t correction = -1;  // data qubit flipped by this edge, -1 for none
    double p = 0;
    double weight = 0;  // -ln p
};

/// Shortest-path tree from one source.
struct PathRow {
    std::vector<int64_t> dist;
    std::vector<uint32_t> via;  // edge index entering each node, UINT32_MAX at the source
};

/// Repetition-code matching graph: S, T and ST edges between detection nodes
/// plus boundary edges at both chain ends. Probabilities are uniform in time
/// per (class, column), with final-readout S and boundary edges kept as their
/// own groups.
class MatchingGraph {
   public:
    static constexpr double kFloor = 1e-6;
    /// Quantization of W for exact integer matching.
    static constexpr double kScale = 1 << 20;

    /// Edges of the lattice with p = 0.
    static std::vector<GraphEdge> skeleton(const CodeLayout &layout);
    /// Group index of each skeleton edge; edges in a group share a probability.
    static std::vector<uint32_t> groups(const CodeLayout &layout, const std::vector<GraphEdge> &edges);

    /// Averages `raw` (one value per skeleton edge) over groups, clamps to
    /// [kFloor, 0.5] and builds shortest paths.
    MatchingGraph(const CodeLayout &layout, const std::vector<double> &raw);

    /// Same group probabilities on another round count of the same code.
    MatchingGraph retarget(const CodeLayout &other) const;

    const CodeLayout &layout() const { return layout_; }
    const std::vector<GraphEdge> &edges() const { return edges_; }
    uint32_t n_nodes() const { return n_; }
    int64_t quantized(uint32_t edge) const { return wq_[edge]; }

    /// Row of shortest paths from `src`; `src == kBoundaryNode` gives boundary
    /// distances. Paths never pass through the boundary.
    const PathRow &row(uint32_t src) const;
    /// Fills `out` when rows are not precomputed (large graphs).
    void compute_row(uint32_t src, PathRow &out) const;
    bool precomputed() const { return !rows_.empty(); }

   private:
    CodeLayout layout_;
    uint32_t n_;
    std::vector<GraphEdge> edges_;
    std::vector<int64_t> wq_;
    std::vector<std::vector<std::pair<uint32_t, uint32_t>>> adj_;  // (neighbor, edge)
    std::vector<uint32_t> boundary_edges_;
    std::vector<PathRow> rows_;
    PathRow boundary_row_;
};

struct DecodeResult {
    std::vector<std::pair<uint32_t, uint32_t>> matches;  // second = kBoundaryNode for boundary
    uint64_t correction = 0;
    bool logical_error = false;
    double weight = 0;
    int64_t weight_q = 0;
};

/// Reusable per-thread decoding state.
class Decoder {
   public:
    explicit Decoder(const MatchingGraph &graph) : g_(graph) {}
    DecodeResult decode(const DetectionTensor &t);
    /// Appends the edge indices of the shortest path from `a` to `b`
    /// (`b` may be kBoundaryNode).
    void path_edges(uint32_t a, uint32_t b, std::vector<uint32_t> &out);

   private:
    const PathRow &row(uint32_t src);
    const MatchingGraph &g_;
    std::unordered_map<uint32_t, PathRow> cache_;
};

DecodeResult mwpm_decode(const DetectionTensor &t, const MatchingGraph &graph);

/// Exhaustive minimum over all matchings of `events` to each other or the
/// boundary, using the graph's quantized shortest-path weights.
int64_t exhaustive_matching_weight(const MatchingGraph &graph, const std::vector<uint32_t> &events);

/// Final-data flips, with data qubit 0 untouched, whose stabilizer parities
/// agree with `events`. Builds consistent synthetic decoder inputs.
uint64_t consistent_final_flips(const CodeLayout &layout, const std::vector<uint32_t> &events);

struct LogicalRate {
    double p = 0;
    double se = 0;
    uint64_t errors = 0;
    uint64_t shots = 0;
};

LogicalRate logical_error_rate(const std::vector<DetectionTensor> &shots, const MatchingGraph &graph);
/// Binomial mean and standard error.
LogicalRate binomial_rate(uint64_t errors, uint64_t shots);

MatchingGraph weights_uniform(const CodeLayout &layout, double p = 0.05);
/// Edge probability = times used by uniform-weight matchings / N, averaged
/// over rounds.
MatchingGraph weights_bootstrap(const DetectionSet &training);
/// S, T, ST from the correlation matrix, boundary from the back-solve.
MatchingGraph weights_pij(const CorrelationMatrix &m, const CodeLayout &layout);
MatchingGraph weights_pij(const DetectionSet &training);
/// Folds every single-error mechanism onto the edge it fires.
MatchingGraph weights_first_principles(const CodeSpec &spec, const NoiseModel &noise);

enum class Weighting : uint8_t { Uniform, Bootstrap, Pij, FirstPrinciples };
const char *weighting_name(Weighting w);
Weighting parse_weighting(const std::string &name);

}  // namespace repstab

#endif  // REPSTAB_DECODER_H

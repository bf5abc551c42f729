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

#ifndef REPSTAB_CORRELATION_H
#define REPSTAB_CORRELATION_H

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "repstab/codes.h"
#include "repstab/detection.h"

namespace repstab {

/// Node ordering for rendering. Space-first: i = s + N_measure * t.
/// Time-first: i = t + (N_r + 1) * s.
enum class NodeOrder : uint8_t { SpaceFirst, TimeFirst };

struct PairMoments {
    double xi, xj, xij;
};

struct PairEstimate {
    double pij = 0;
    double pi = 0;
    double pj = 0;
    bool flagged = false;
};

/// Detection moments produced by independent edges p_i (i alone), p_j (j
/// alone) and p_ij (both).
PairMoments forward_moments(double pi, double pj, double pij);

/// Exact inversion of forward_moments. A negative radicand is clamped to zero
/// and flagged, as is any node with <x> >= 0.5.
PairEstimate pij_exact(double xi, double xj, double xij);

/// Covariance over (1 - 2<x_i>)(1 - 2<x_j>). Overestimates pij_exact by about
/// 1 / (1 - 3 p_ij).
double pij_approx(double xi, double xj, double xij);

/// Probability that exactly one of two independent flips happens.
inline double g_fold(double p, double q) { return p + q - 2 * p * q; }

/// Standard deviation of the p_ij estimate from n shots. Negative p_ij counts
/// as zero.
double noise_floor(double xi, double xj, double pij, uint64_t n);

/// Single-pass detection and pair-coincidence counts. Merge is associative.
class PairAccumulator {
   public:
    explicit PairAccumulator(uint32_t n_nodes);
    void add(const DetectionTensor &t);
    void add(const DetectionSet &set);
    void merge(const PairAccumulator &other);

    uint32_t n_nodes() const { return n_; }
    uint64_t n_shots() const { return shots_; }
    uint64_t count(uint32_t i) const { return pairs_[index(i, i)]; }
    uint64_t count(uint32_t i, uint32_t j) const { return pairs_[i <= j ? index(i, j) : index(j, i)]; }

   private:
    size_t index(uint32_t i, uint32_t j) const {
        return static_cast<size_t>(i) * n_ - static_cast<size_t>(i) * (i - 1) / 2 + (j - i);
    }
    uint32_t n_;
    uint64_t shots_ = 0;
    std::vector<uint64_t> pairs_;  // upper triangle, diagonal holds single counts
};

/// Symmetric n x n matrix in space-first node order; the diagonal stores <x_i>.
struct CorrelationMatrix {
    uint32_t n_nodes = 0;
    uint32_t n_measure = 0;
    uint32_t n_rounds = 0;  // detection rounds N_r + 1
    uint64_t n_shots = 0;
    bool approximate = false;
    std::vector<double> values;
    std::vector<double> marginals;  // [i * n + j]: p_i solved from pair (i, j)
    std::vector<uint8_t> flags;     // per node on the diagonal, per pair off it

    double p(uint32_t i, uint32_t j) const { return values[static_cast<size_t>(i) * n_nodes + j]; }
    double def(uint32_t i) const { return p(i, i); }
    bool flagged(uint32_t i, uint32_t j) const { return flags[static_cast<size_t>(i) * n_nodes + j] != 0; }
    double sigma(uint32_t i, uint32_t j) const;
    /// Rendered value: zero on the diagonal.
    double rendered(uint32_t i, uint32_t j) const { return i == j ? 0.0 : p(i, j); }

    /// Position of `node` in the given ordering, and its inverse.
    uint32_t position(uint32_t node, NodeOrder order) const;
    uint32_t node_at(uint32_t position, NodeOrder order) const;
};

CorrelationMatrix pij_exact(const PairAccumulator &acc, const CodeLayout &layout);
CorrelationMatrix pij_exact(const DetectionSet &set);
CorrelationMatrix pij_approx(const PairAccumulator &acc, const CodeLayout &layout);
CorrelationMatrix pij_approx(const DetectionSet &set);

/// Rows "i,j,p_ij,sigma" for i < j in the chosen ordering.
void write_matrix_csv(std::ostream &out, const CorrelationMatrix &m, NodeOrder order);

enum class EdgeClass : uint8_t { S, T, ST, STPrime, T2, T3, T4, T5, Boundary, Crosstalk };
inline constexpr size_t kNumEdgeClasses = 10;
const char *edge_class_name(EdgeClass c);

inline constexpr uint32_t kBoundaryNode = UINT32_MAX;

struct Edge {
    uint32_t a = 0;
    uint32_t b = kBoundaryNode;
    double p = 0;
    double sigma = 0;
    bool flagged = false;
};

struct CrosstalkEntry {
    uint32_t s_a = 0;
    uint32_t s_b = 0;
    double p = 0;      // averaged over rounds
    double sigma = 0;  // noise floor of the average
    double exceedance = 0;
    uint32_t rounds = 0;
};

struct EdgeReport {
    std::array<std::vector<Edge>, kNumEdgeClasses> classes;
    std::array<double, kNumEdgeClasses> medians{};
    std::vector<CrosstalkEntry> crosstalk;

    const std::vector<Edge> &operator[](EdgeClass c) const { return classes[static_cast<size_t>(c)]; }
    double median(EdgeClass c) const { return medians[static_cast<size_t>(c)]; }
};

/// Fold over the S, T and ST edges touching `node` (the matching-graph edges).
double edge_sum(const CorrelationMatrix &m, const CodeLayout &layout, uint32_t node);

struct BoundaryEstimate {
    uint32_t node = 0;
    double p = 0;
    double p_sum = 0;
    bool flagged = false;
};

/// p_iB = (<x_i> - p_sum) / (1 - 2 p_sum) for every node at either end of a
/// repetition chain.
std::vector<BoundaryEstimate> boundary_edge_probs(const CorrelationMatrix &m, const CodeLayout &layout);

/// Scalar form of the boundary back-solve.
BoundaryEstimate boundary_from_edges(double x_i, const std::vector<double> &edges);

/// Bins node pairs by (ds, dt) for a repetition code.
EdgeReport classify_edges(const CorrelationMatrix &m, const CodeLayout &layout);

}  // namespace repstab

#endif  // REPSTAB_CORRELATION_H

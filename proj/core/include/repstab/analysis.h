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

#ifndef REPSTAB_ANALYSIS_H
#define REPSTAB_ANALYSIS_H

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "repstab/codes.h"
#include "repstab/decoder.h"
#include "repstab/detection.h"
#include "repstab/noise.h"

namespace repstab {

/// One point of P_error against round count.
struct RoundPoint {
    uint32_t rounds = 0;
    double p = 0;
    uint64_t shots = 0;  // 0: unweighted fit
};

struct EpsFit {
    double eps = 0;
    double se = 0;
    uint32_t min_rounds = 10;
    size_t points = 0;
};

/// P(n) = 0.5 * (1 - (1 - 2 eps)^n).
double eps_ansatz(double eps, uint32_t rounds);
/// Inverse of the ansatz at a single round count.
double eps_from_p(double p, uint32_t rounds);

/// Least-squares fit of the ansatz to points with rounds > min_rounds.
/// Points with shots > 0 are weighted by the binomial variance of the model.
EpsFit fit_eps_per_round(const std::vector<RoundPoint> &points, uint32_t min_rounds = 10);

struct DistancePoint {
    uint32_t d = 0;
    double eps = 0;
    double se = 0;
};

struct FitResult {
    std::vector<DistancePoint> per_distance;  // every input point
    std::vector<uint32_t> used;
    std::vector<uint32_t> excluded;
    double slope = 0;
    double intercept = 0;
    double lambda = 0;
    double lambda_err = 0;
    double c = 0;
    double c_err = 0;
    uint32_t min_rounds = 10;
    bool flagged = false;  // lambda <= 1
};

/// Regression of ln eps on (d + 1) / 2: Lambda = exp(-slope), C = exp(intercept).
/// Weighted by 1 / (se / eps)^2 when every used point has se > 0.
FitResult fit_lambda(const std::vector<DistancePoint> &points, const std::vector<uint32_t> &exclude = {3});

/// Lambda^-1 with a standard error.
struct Estimate {
    double value = 0;
    double se = 0;
};

struct DiffEstimate {
    Estimate lo;
    Estimate hi;
    Estimate diff;  // hi - lo
};

/// f(x) = Lambda^-1 at arbitrary rate vectors.
class BudgetBackend {
   public:
    virtual ~BudgetBackend() = default;
    virtual Estimate evaluate(const NoiseModel &noise, uint64_t shots) = 0;
    /// Models differing in one component; backends may share random numbers.
    virtual DiffEstimate evaluate_pair(const NoiseModel &lo, const NoiseModel &hi, uint64_t shots) = 0;
    virtual uint64_t initial_shots() const { return 1; }
    virtual uint64_t max_shots() const { return 1; }
};

struct BudgetComponent {
    std::string name;
    double rate = 0;
    double weight = 0;
    double weight_se = 0;
    double contribution = 0;
    double pct = 0;
    uint64_t shots = 0;
    bool converged = true;  // SE below target_rel_se of the difference
    bool zeroed = false;
};

struct ErrorBudget {
    std::vector<BudgetComponent> components;  // kNumComponents entries in Component order
    double total = 0;
    double direct = 0;
    double direct_se = 0;
    double stray = 0;  // direct - total
    const BudgetComponent &operator[](Component c) const { return components[static_cast<size_t>(c)]; }
};

/// Gradient of f at x/2 by central differences (step x_k / 4); shots double
/// until the difference SE is below target_rel_se of its magnitude or the
/// backend limit is reached. Uses the six component rates; correlated
/// channels and bursts are ignored.
ErrorBudget error_budget(const NoiseModel &noise, BudgetBackend &backend, double target_rel_se = 0.05);

/// Monte Carlo f: memory experiments at `rounds` over `distances`, decoded
/// with first-principles weights, Lambda^-1 from an unweighted ln-space fit.
/// Pairs share seeds, an envelope and the decoder of their midpoint model;
/// SEs are jackknife over shot batches.
class SimulationBackend : public BudgetBackend {
   public:
    struct Config {
        CodeFamily family = CodeFamily::RepPhase;
        std::vector<uint32_t> distances{3, 5};
        uint32_t rounds = 20;
        uint64_t shots = 20000;
        uint64_t max_shots = 320000;
        uint32_t batches = 20;
        uint64_t seed = 1;
        unsigned workers = 1;
    };
    explicit SimulationBackend(Config cfg);
    Estimate evaluate(const NoiseModel &noise, uint64_t shots) override;
    DiffEstimate evaluate_pair(const NoiseModel &lo, const NoiseModel &hi, uint64_t shots) override;
    uint64_t initial_shots() const override { return cfg_.shots; }
    uint64_t max_shots() const override { return cfg_.max_shots; }

   private:
    /// counts[model][distance][batch]
    std::vector<std::vector<std::vector<uint64_t>>> run(const std::vector<NoiseModel> &models, uint64_t shots);
    Config cfg_;
};

struct PostselectStats {
    std::vector<uint32_t> rounds;     // retained series, n = 1..N
    std::vector<double> retained;     // fraction with no detection in stabilizer rounds 0..n-1
    double retained_per_round = 1;    // exp(slope) of ln retained vs n
    double retained_per_round_err = 0;
    std::vector<uint32_t> run_rounds;  // one entry per run
    std::vector<uint64_t> run_kept;
    std::vector<double> logical;       // logical error among fully detection-free shots
    std::vector<double> logical_se;
    double error_per_round = 0;        // slope of a weighted linear fit of logical vs rounds
    double error_per_round_err = 0;
    bool truncated = false;
};

/// Post-selection on d=2 surface-code runs (one DetectionSet per round
/// count). The retained series comes from prefixes of the longest run.
PostselectStats postselect_stats(const std::vector<DetectionSet> &runs);

struct Overhead {
    uint32_t distance = 0;
    uint64_t qubits = 0;
};

/// Smallest odd d >= 3 with Lambda^-(d+1)/2 <= target; qubits = 2 d^2.
Overhead overhead_projection(double lambda, double target = 1e-12);

struct SubsampleResult {
    uint32_t d = 0;
    LogicalRate average;             // pooled over maps
    std::vector<LogicalRate> per_map;
};

using GraphFactory = std::function<MatchingGraph(const CodeLayout &child)>;

/// Decodes every sub-chain of `parent` for each requested distance with the
/// graph `make_graph` builds for the child layout.
std::vector<SubsampleResult> subsampled_sweep(const DetectionSet &parent, const std::vector<uint32_t> &distances,
                                              const GraphFactory &make_graph);

/// Decodes `shots` on up to `workers` threads and counts logical errors.
uint64_t count_logical_errors(const std::vector<DetectionTensor> &shots, const MatchingGraph &graph,
                              unsigned workers = 1);

}  // namespace repstab

#endif

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

#include "repstab/experiment.h"

#include <algorithm>
#include <memory>

#include "repstab/detection.h"
#include "repstab/errors.h"

namespace repstab {

void SweepConfig::validate() const {
    if (family == CodeFamily::Surface2) {
        throw ValidationError("memory sweeps run repetition codes");
    }
    noise.validate();
    if (distances.empty() || rounds.empty() || weightings.empty()) {
        throw ValidationError("sweep needs distances, rounds and weightings");
    }
    if (shots == 0) {
        throw ValidationError("sweep needs at least one shot per point");
    }
    for (uint32_t d : distances) {
        CodeSpec::repetition(family, d, 1).validate();
    }
    for (uint32_t n : rounds) {
        if (n == 0) {
            throw ValidationError("round counts must be positive");
        }
    }
}

const WeightingFit &SweepResult::fit(Weighting w) const {
    for (const WeightingFit &f : fits) {
        if (f.weighting == w) {
            return f;
        }
    }
    throw ValidationError(std::string("sweep has no fit for weighting ") + weighting_name(w));
}

std::vector<RoundPoint> SweepResult::curve(Weighting w, uint32_t d) const {
    std::vector<RoundPoint> out;
    for (const SweepPoint &p : points) {
        if (p.weighting == w && p.d == d) {
            out.push_back({p.rounds, p.rate.p, p.rate.shots});
        }
    }
    return out;
}

MatchingGraph weighting_graph(Weighting w, const CodeSpec &spec, const NoiseModel &noise,
                              const DetectionSet *training) {
    CodeLayout layout = layout_of(spec);
    switch (w) {
        case Weighting::Uniform:
            return weights_uniform(layout);
        case Weighting::FirstPrinciples:
            return weights_first_principles(spec, noise);
        case Weighting::Bootstrap:
        case Weighting::Pij: {
            if (training == nullptr) {
                throw ValidationError(std::string(weighting_name(w)) + " weights need training data");
            }
            MatchingGraph trained = w == Weighting::Pij ? weights_pij(*training) : weights_bootstrap(*training);
            return trained.retarget(layout);
        }
    }
    throw ValidationError("unknown weighting");
}

namespace {

uint64_t point_seed(uint64_t seed, uint32_t d, uint32_t rounds, bool training) {
    uint64_t z = seed + 0x9E3779B97F4A7C15ull * (d + 1) + 0xBF58476D1CE4E5B9ull * (rounds + 1) + (training ? 1 : 0);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace

SweepResult run_memory_sweep(const SweepConfig &cfg) {
    cfg.validate();
    const bool needs_training = std::any_of(cfg.weightings.begin(), cfg.weightings.end(), [](Weighting w) {
        return w == Weighting::Bootstrap || w == Weighting::Pij;
    });
    const uint32_t train_rounds =
        cfg.training_rounds ? cfg.training_rounds : *std::max_element(cfg.rounds.begin(), cfg.rounds.end());

    SweepResult out;
    for (uint32_t d : cfg.distances) {
        std::unique_ptr<DetectionSet> training;
        std::vector<std::unique_ptr<MatchingGraph>> trained(cfg.weightings.size());
        if (needs_training) {
            CodeSpec tspec = CodeSpec::repetition(cfg.family, d, train_rounds);
            DetectionSampler ts(tspec, cfg.noise, point_seed(cfg.seed, d, train_rounds, true));
            training = std::make_unique<DetectionSet>(ts.sample_set(cfg.training_shots));
            for (size_t wi = 0; wi < cfg.weightings.size(); ++wi) {
                Weighting w = cfg.weightings[wi];
                if (w == Weighting::Bootstrap || w == Weighting::Pij) {
                    trained[wi] = std::make_unique<MatchingGraph>(weighting_graph(w, tspec, cfg.noise, training.get()));
                }
            }
        }
        for (uint32_t n : cfg.rounds) {
            CodeSpec spec = CodeSpec::repetition(cfg.family, d, n);
            DetectionSampler sampler(spec, cfg.noise, point_seed(cfg.seed, d, n, false));
            DetectionSet set = sampler.sample_set(cfg.shots);
            for (size_t wi = 0; wi < cfg.weightings.size(); ++wi) {
                Weighting w = cfg.weightings[wi];
                MatchingGraph graph = trained[wi] ? trained[wi]->retarget(set.layout)
                                                  : weighting_graph(w, spec, cfg.noise, nullptr);
                uint64_t errors = count_logical_errors(set.shots, graph, cfg.workers);
                out.points.push_back({d, n, w, binomial_rate(errors, set.shots.size())});
            }
        }
    }

    for (Weighting w : cfg.weightings) {
        WeightingFit wf;
        wf.weighting = w;
        std::vector<DistancePoint> dp;
        for (uint32_t d : cfg.distances) {
            EpsFit e = fit_eps_per_round(out.curve(w, d), cfg.min_rounds);
            wf.eps.push_back(e);
            dp.push_back({d, e.eps, e.se});
        }
        wf.lambda = fit_lambda(dp, cfg.exclude);
        wf.lambda.min_rounds = cfg.min_rounds;
        out.fits.push_back(std::move(wf));
    }
    return out;
}

}  // namespace repstab

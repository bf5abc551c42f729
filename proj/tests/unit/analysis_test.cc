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

#include "repstab/analysis.h"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <tuple>
#include <random>

#include "repstab/errors.h"

namespace repstab {
namespace {

std::vector<RoundPoint> exact_curve(double eps, uint64_t shots) {
    std::vector<RoundPoint> pts;
    for (uint32_t n : {1u, 5u, 11u, 15u, 20u, 30u, 40u, 50u}) {
        pts.push_back({n, 0.5 * (1 - std::pow(1 - 2 * eps, n)), shots});
    }
    return pts;
}

TEST(analysis, ansatz_and_inverse_agree) {
    for (double eps : {1e-6, 1e-3, 0.05, 0.2}) {
        for (uint32_t n : {1u, 7u, 30u}) {
            double p = eps_ansatz(eps, n);
            EXPECT_NEAR(p, 0.5 * (1 - std::pow(1 - 2 * eps, n)), 2e-15);
            EXPECT_NEAR(eps_from_p(p, n), eps, 1e-10 * eps);
        }
    }
    EXPECT_THROW(eps_from_p(0.5, 3), NumericError);
}

TEST(analysis, eps_fit_recovers_exact_curve) {
    for (double eps = 1e-5; eps <= 0.2; eps *= 1.7) {
        for (uint64_t shots : {uint64_t{0}, uint64_t{20000}}) {
            EpsFit f = fit_eps_per_round(exact_curve(eps, shots));
            EXPECT_NEAR(f.eps, eps, 1e-6 * eps) << eps << " " << shots;
            EXPECT_EQ(f.points, 6u);
        }
    }
    EXPECT_NEAR(fit_eps_per_round(exact_curve(0.01, 0)).eps, 0.0100, 1e-8);
}

TEST(analysis, eps_fit_at_zero_noise_is_zero) {
    std::vector<RoundPoint> pts;
    for (uint32_t n : {12u, 20u, 30u}) {
        pts.push_back({n, 0.0, 1000});
    }
    EpsFit f = fit_eps_per_round(pts);
    EXPECT_EQ(f.eps, 0.0);
}

TEST(analysis, eps_fit_ignores_low_rounds_and_needs_three_points) {
    auto pts = exact_curve(0.01, 0);
    pts[0].p = 0.4;  // a wild n=1 point is below the cutoff
    EXPECT_NEAR(fit_eps_per_round(pts).eps, 0.01, 1e-8);
    std::vector<RoundPoint> few = {{11, 0.1, 0}, {20, 0.2, 0}, {5, 0.05, 0}};
    EXPECT_THROW(fit_eps_per_round(few), ValidationError);
    EXPECT_NO_THROW(fit_eps_per_round(few, 4));
}

TEST(analysis, eps_fit_se_matches_binomial_information) {
    // One free parameter: SE^2 = 1 / sum J^2 / var at the exact solution.
    double eps = 0.003;
    auto pts = exact_curve(eps, 5000);
    double info = 0;
    for (const RoundPoint &p : pts) {
        if (p.rounds <= 10) continue;
        double f = p.p;
        double j = p.rounds * std::pow(1 - 2 * eps, p.rounds - 1.0);
        info += j * j / (f * (1 - f) / p.shots);
    }
    EXPECT_NEAR(fit_eps_per_round(pts).se, 1 / std::sqrt(info), 1e-9);
}

TEST(analysis, lambda_two_point_ratio) {
    FitResult f = fit_lambda({{3, 0.03, 0}, {5, 0.01, 0}}, {});
    EXPECT_NEAR(f.lambda, 3.0, 1e-12);
    EXPECT_FALSE(f.flagged);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(1e-6, 0.3);
    for (int i = 0; i < 200; ++i) {
        double a = u(rng), b = u(rng);
        uint32_t d = 3 + 2 * (i % 5);
        FitResult g = fit_lambda({{d, a, a * 0.1}, {d + 2, b, b * 0.2}}, {});
        EXPECT_NEAR(g.lambda, a / b, 1e-10 * a / b);
        EXPECT_EQ(g.flagged, a / b <= 1.0);
    }
}

TEST(analysis, lambda_default_excludes_three) {
    std::vector<DistancePoint> pts = {{3, 0.5 * 0.04, 0}, {5, 0.01, 0}, {7, 0.0025, 0}, {9, 0.000625, 0}};
    FitResult f = fit_lambda(pts);
    EXPECT_EQ(f.excluded, std::vector<uint32_t>{3});
    EXPECT_EQ(f.used, (std::vector<uint32_t>{5, 7, 9}));
    EXPECT_NEAR(f.lambda, 4.0, 1e-12);
    // eps = C / Lambda^((d+1)/2) with C = 0.01 * 4^3
    EXPECT_NEAR(f.c, 0.64, 1e-12);
    EXPECT_NEAR(f.lambda_err, 0.0, 1e-12);
    EXPECT_THROW(fit_lambda({{3, 0.1, 0}, {5, 0.01, 0}}), ValidationError);
    EXPECT_THROW(fit_lambda({{5, 0.0, 0}, {7, 0.01, 0}}), NumericError);
}

TEST(analysis, lambda_fit_matches_normal_equations) {
    // Independent weighted least squares through the 2x2 normal equations.
    std::vector<DistancePoint> pts = {{5, 2.1e-3, 1e-4}, {7, 6.5e-4, 4e-5}, {9, 2.4e-4, 2e-5}, {11, 6.0e-5, 8e-6}};
    double s0 = 0, s1 = 0, s2 = 0, t0 = 0, t1 = 0;
    for (const auto &p : pts) {
        double x = (p.d + 1) / 2.0, y = std::log(p.eps), w = std::pow(p.eps / p.se, 2);
        s0 += w, s1 += w * x, s2 += w * x * x, t0 += w * y, t1 += w * x * y;
    }
    double det = s0 * s2 - s1 * s1;
    double b = (s0 * t1 - s1 * t0) / det;
    double a = (s2 * t0 - s1 * t1) / det;
    double chi2 = 0;
    for (const auto &p : pts) {
        double x = (p.d + 1) / 2.0, r = std::log(p.eps) - a - b * x;
        chi2 += std::pow(p.eps / p.se, 2) * r * r;
    }
    double scale = std::max(1.0, chi2 / 2);
    FitResult f = fit_lambda(pts);
    EXPECT_NEAR(f.lambda, std::exp(-b), 1e-12);
    EXPECT_NEAR(f.c, std::exp(a), 1e-12 * std::exp(a));
    EXPECT_NEAR(f.lambda_err, std::exp(-b) * std::sqrt(scale * s0 / det), 1e-12);
    EXPECT_NEAR(f.c_err, std::exp(a) * std::sqrt(scale * s2 / det), 1e-12 * std::exp(a));
}

/// f(x) = b.x + x^T H x / 2, exact and noiseless.
class QuadraticBackend : public BudgetBackend {
   public:
    std::array<double, kNumComponents> b{};
    std::array<std::array<double, kNumComponents>, kNumComponents> H{};
    int fail_first = 0;
    std::vector<uint64_t> calls;

    double f(const NoiseModel &m) const {
        double v = 0;
        for (size_t i = 0; i < kNumComponents; ++i) {
            v += b[i] * m.x[i];
            for (size_t j = 0; j < kNumComponents; ++j) {
                v += 0.5 * m.x[i] * H[i][j] * m.x[j];
            }
        }
        return v;
    }
    void maybe_fail(uint64_t shots) {
        calls.push_back(shots);
        if (fail_first > 0) {
            --fail_first;
            throw NumericError("synthetic failure");
        }
    }
    Estimate evaluate(const NoiseModel &m, uint64_t shots) override {
        maybe_fail(shots);
        return {f(m), 0};
    }
    DiffEstimate evaluate_pair(const NoiseModel &lo, const NoiseModel &hi, uint64_t shots) override {
        maybe_fail(shots);
        return {{f(lo), 0}, {f(hi), 0}, {f(hi) - f(lo), 0}};
    }
    uint64_t initial_shots() const override { return 100; }
    uint64_t max_shots() const override { return 800; }
};

TEST(analysis, budget_reconstructs_quadratic_exactly) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    for (int trial = 0; trial < 20; ++trial) {
        QuadraticBackend q;
        for (size_t i = 0; i < kNumComponents; ++i) {
            q.b[i] = u(rng);
            for (size_t j = 0; j <= i; ++j) {
                q.H[i][j] = q.H[j][i] = u(rng) * 20 - 30;
            }
        }
        NoiseModel a = NoiseModel::from_rates(0.05, 0.007, 0.02, 0.005, 0.001, 0.0008);
        ErrorBudget eb = error_budget(a, q);
        double sum = 0;
        for (size_t k = 0; k < kNumComponents; ++k) {
            // gradient at a/2
            double g = q.b[k];
            for (size_t j = 0; j < kNumComponents; ++j) {
                g += q.H[k][j] * a.x[j] / 2;
            }
            if (k == static_cast<size_t>(Component::I) && g < 0) {
                EXPECT_TRUE(eb.components[k].zeroed);
                g = 0;
            }
            EXPECT_NEAR(eb.components[k].weight, g, 1e-9 * std::max(1.0, std::abs(g)));
            EXPECT_TRUE(eb.components[k].converged);
            sum += g * a.x[k];
        }
        EXPECT_NEAR(eb.total, sum, 1e-12);
        EXPECT_NEAR(eb.direct, q.f(a), 1e-15);
        if (!eb[Component::I].zeroed) {
            EXPECT_NEAR(eb.total, q.f(a), 1e-9 * q.f(a));
            EXPECT_NEAR(eb.stray, 0.0, 1e-9 * q.f(a));
        }
    }
}

TEST(analysis, budget_percentages_and_zeroed_i_component) {
    QuadraticBackend q;
    q.b = {3, 10, 1.5, 1.6, 4, -2};
    NoiseModel a = NoiseModel::from_rates(0.05, 0.007, 0.02, 0.005, 0.001, 0.0008);
    ErrorBudget eb = error_budget(a, q);
    EXPECT_TRUE(eb[Component::I].zeroed);
    EXPECT_EQ(eb[Component::I].contribution, 0.0);
    double pct = 0;
    for (const auto &c : eb.components) {
        pct += c.pct;
        EXPECT_GE(c.contribution, 0.0);
    }
    EXPECT_NEAR(pct, 100.0, 1e-9);
    EXPECT_EQ(eb[Component::DD].name, "DD");
}

TEST(analysis, budget_retries_then_fails_loudly) {
    QuadraticBackend q;
    q.b = {1, 1, 1, 1, 1, 1};
    q.fail_first = 2;
    NoiseModel a = NoiseModel::from_rates(0.05, 0.007, 0.02, 0.005, 0.001, 0.0008);
    ErrorBudget eb = error_budget(a, q);
    EXPECT_EQ(q.calls[0], 100u);
    EXPECT_EQ(q.calls[1], 200u);
    EXPECT_EQ(q.calls[2], 400u);
    EXPECT_EQ(eb[Component::DD].shots, 400u);

    QuadraticBackend broken;
    broken.fail_first = 1000;
    EXPECT_THROW(error_budget(a, broken), NumericError);
    EXPECT_EQ(broken.calls.back(), 800u);
}

TEST(analysis, simulated_budget_reconstructs_direct_value) {
    SimulationBackend::Config cfg;
    cfg.family = CodeFamily::RepPhase;
    cfg.shots = 60000;
    cfg.max_shots = 60000;
    cfg.seed = 3;
    SimulationBackend be(cfg);
    ErrorBudget eb = error_budget(NoiseModel::phase_flip_budget(), be);
    EXPECT_NEAR(eb.total, eb.direct, 0.10 * eb.direct);
    EXPECT_GT(eb[Component::DD].contribution, eb[Component::CZ].contribution);
    EXPECT_GT(eb[Component::DD].pct, 40.0);
}

TEST(analysis, simulation_backend_pairs_share_randomness) {
    SimulationBackend::Config cfg;
    cfg.family = CodeFamily::RepBit;
    cfg.shots = 20000;
    SimulationBackend be(cfg);
    NoiseModel m = NoiseModel::bit_flip_budget();
    DiffEstimate same = be.evaluate_pair(m, m, 20000);
    EXPECT_EQ(same.diff.value, 0.0);
    EXPECT_EQ(same.diff.se, 0.0);
    EXPECT_GT(same.lo.se, 0.0);
}

TEST(analysis, overhead_projection_cases) {
    Overhead o = overhead_projection(10.0);
    EXPECT_EQ(o.distance, 23u);
    EXPECT_EQ(o.qubits, 1058u);
    EXPECT_EQ(overhead_projection(1e12).distance, 3u);
    uint32_t k = static_cast<uint32_t>(std::ceil(2 * 12 / std::log10(4.0) - 1));
    if (k % 2 == 0) ++k;
    EXPECT_EQ(overhead_projection(4.0).distance, k);
    EXPECT_THROW(overhead_projection(1.0), ValidationError);
    EXPECT_THROW(overhead_projection(0.5), ValidationError);
    EXPECT_THROW(overhead_projection(3.0, 1.5), ValidationError);
}

TEST(analysis, overhead_projection_is_minimal) {
    for (double lam = 1.05; lam < 200; lam *= 1.13) {
        for (double target : {1e-3, 1e-6, 1e-12}) {
            Overhead o = overhead_projection(lam, target);
            ASSERT_EQ(o.distance % 2, 1u);
            ASSERT_GE(o.distance, 3u);
            EXPECT_LE(std::pow(lam, -(o.distance + 1.0) / 2.0), target * (1 + 1e-9));
            if (o.distance > 3) {
                EXPECT_GT(std::pow(lam, -(o.distance - 1.0) / 2.0), target);
            }
            EXPECT_EQ(o.qubits, 2ull * o.distance * o.distance);
        }
    }
}

std::vector<DetectionSet> surface_runs(const NoiseModel &noise, std::vector<uint32_t> rounds, uint64_t shots) {
    std::vector<DetectionSet> runs;
    for (uint32_t n : rounds) {
        DetectionSampler s(CodeSpec::surface2(Basis::Z, n), noise, 17 + n);
        runs.push_back(s.sample_set(shots));
    }
    return runs;
}

TEST(analysis, postselect_zero_noise) {
    PostselectStats ps = postselect_stats(surface_runs(NoiseModel::zero(), {2, 5, 9}, 300));
    ASSERT_EQ(ps.retained.size(), 9u);
    for (double r : ps.retained) {
        EXPECT_EQ(r, 1.0);
    }
    EXPECT_EQ(ps.retained_per_round, 1.0);
    for (double l : ps.logical) {
        EXPECT_EQ(l, 0.0);
    }
    EXPECT_EQ(ps.error_per_round, 0.0);
    EXPECT_FALSE(ps.truncated);
}

TEST(analysis, postselect_retained_is_monotone_and_bounded) {
    PostselectStats ps = postselect_stats(surface_runs(NoiseModel::surface2_model(), {1, 3, 6, 10}, 4000));
    ASSERT_EQ(ps.rounds.size(), 10u);
    for (size_t i = 0; i < ps.retained.size(); ++i) {
        EXPECT_GT(ps.retained[i], 0.0);
        EXPECT_LE(ps.retained[i], 1.0);
        if (i > 0) {
            EXPECT_LE(ps.retained[i], ps.retained[i - 1]);
        }
    }
    EXPECT_GT(ps.retained_per_round, 0.5);
    EXPECT_LT(ps.retained_per_round, 0.95);
    for (double l : ps.logical) {
        EXPECT_GE(l, 0.0);
        EXPECT_LE(l, 1.0);
    }
}

TEST(analysis, postselect_truncates_when_nothing_survives) {
    NoiseModel loud = NoiseModel::from_rates(0.5, 0.5, 0.5, 0.5, 0.5, 0.5);
    PostselectStats ps = postselect_stats(surface_runs(loud, {8}, 50));
    EXPECT_TRUE(ps.truncated);
    EXPECT_LT(ps.retained.size(), 8u);
    EXPECT_THROW(postselect_stats({}), ValidationError);
    DetectionSampler rep(CodeSpec::repetition(CodeFamily::RepBit, 3, 2), NoiseModel::zero(), 1);
    EXPECT_THROW(postselect_stats({rep.sample_set(10)}), ValidationError);
}

TEST(analysis, subsample_at_parent_distance_is_direct_decode) {
    CodeSpec spec = CodeSpec::repetition(CodeFamily::RepPhase, 7, 6);
    DetectionSampler s(spec, NoiseModel::phase_flip_budget(), 4);
    DetectionSet set = s.sample_set(3000);
    MatchingGraph g = weights_first_principles(spec, NoiseModel::phase_flip_budget());
    auto res = subsampled_sweep(set, {7}, [&](const CodeLayout &) { return g; });
    ASSERT_EQ(res.size(), 1u);
    ASSERT_EQ(res[0].per_map.size(), 1u);
    LogicalRate direct = logical_error_rate(set.shots, g);
    EXPECT_EQ(res[0].average.errors, direct.errors);
    EXPECT_EQ(res[0].average.shots, direct.shots);
    EXPECT_THROW(subsampled_sweep(set, {9}, [&](const CodeLayout &) { return g; }), ValidationError);
}

TEST(analysis, subsample_spread_matches_bootstrap_error) {
    const NoiseModel noise = NoiseModel::bit_flip_budget().scaled(1.5);
    CodeSpec spec = CodeSpec::repetition(CodeFamily::RepBit, 11, 10);
    DetectionSampler s(spec, noise, 9);
    DetectionSet set = s.sample_set(10000);
    auto make = [&](const CodeLayout &child) {
        return weights_first_principles(CodeSpec::repetition(CodeFamily::RepBit, child.distance, child.rounds), noise);
    };
    auto res = subsampled_sweep(set, {3, 5}, make);
    ASSERT_EQ(res[0].per_map.size(), 9u);
    ASSERT_EQ(res[1].per_map.size(), 7u);

    for (const SubsampleResult &r : res) {
        // Bootstrap SE of one map's rate from its decode outputs.
        std::vector<uint8_t> outcomes(set.shots.size(), 0);
        CodeLayout child = layout_of(CodeSpec::repetition(CodeFamily::RepBit, r.d, 10));
        MatchingGraph g = make(child);
        Decoder dec(g);
        SubsampleMap m = subsample_maps(11, r.d)[0];
        for (size_t i = 0; i < set.shots.size(); ++i) {
            outcomes[i] = dec.decode(subsample(set.shots[i], set.layout, child, m)).logical_error;
        }
        std::mt19937_64 rng(r.d);
        std::uniform_int_distribution<size_t> pick(0, outcomes.size() - 1);
        std::vector<double> boot;
        for (int b = 0; b < 200; ++b) {
            uint64_t e = 0;
            for (size_t i = 0; i < outcomes.size(); ++i) {
                e += outcomes[pick(rng)];
            }
            boot.push_back(static_cast<double>(e) / outcomes.size());
        }
        double mb = 0, vb = 0;
        for (double v : boot) mb += v / boot.size();
        for (double v : boot) vb += (v - mb) * (v - mb) / (boot.size() - 1);

        double mean = 0, var = 0;
        for (const LogicalRate &lr : r.per_map) mean += lr.p / r.per_map.size();
        for (const LogicalRate &lr : r.per_map) var += (lr.p - mean) * (lr.p - mean) / (r.per_map.size() - 1);
        EXPECT_GT(r.average.errors, 0u);
        EXPECT_LT(std::sqrt(var), 2.0 * std::sqrt(vb)) << "d=" << r.d;
    }
}

TEST(analysis, threaded_counting_matches_serial) {
    CodeSpec spec = CodeSpec::repetition(CodeFamily::RepBit, 5, 8);
    DetectionSampler s(spec, NoiseModel::bit_flip_budget(), 2);
    DetectionSet set = s.sample_set(5000);
    MatchingGraph g = weights_first_principles(spec, NoiseModel::bit_flip_budget());
    EXPECT_EQ(count_logical_errors(set.shots, g, 1), count_logical_errors(set.shots, g, 4));
    EXPECT_EQ(count_logical_errors(set.shots, g, 1), logical_error_rate(set.shots, g).errors);
}

TEST(analysis, retarget_keeps_group_probabilities) {
    CodeSpec train = CodeSpec::repetition(CodeFamily::RepPhase, 5, 12);
    CodeSpec use = CodeSpec::repetition(CodeFamily::RepPhase, 5, 4);
    NoiseModel n = NoiseModel::phase_flip_budget();
    MatchingGraph trained = weights_first_principles(train, n);
    MatchingGraph same = trained.retarget(trained.layout());
    for (size_t e = 0; e < same.edges().size(); ++e) {
        EXPECT_NEAR(same.edges()[e].p, trained.edges()[e].p, 1e-12 * trained.edges()[e].p);
    }
    // (class, column or correction, final readout) -> p
    auto key = [](const CodeLayout &L, const GraphEdge &e) {
        bool fin = (e.cls == EdgeClass::S || e.cls == EdgeClass::Boundary) && L.node_t(e.a) == L.rounds;
        uint32_t col = e.cls == EdgeClass::Boundary ? static_cast<uint32_t>(e.correction) : L.node_s(e.a);
        return std::make_tuple(static_cast<int>(e.cls), col, fin);
    };
    std::map<std::tuple<int, uint32_t, bool>, double> want;
    for (const GraphEdge &e : trained.edges()) {
        want[key(trained.layout(), e)] = e.p;
    }
    MatchingGraph moved = trained.retarget(layout_of(use));
    EXPECT_EQ(moved.edges().size(), MatchingGraph::skeleton(layout_of(use)).size());
    for (const GraphEdge &e : moved.edges()) {
        EXPECT_NEAR(e.p, want.at(key(moved.layout(), e)), 1e-12 * e.p);
    }
    EXPECT_THROW(trained.retarget(layout_of(CodeSpec::repetition(CodeFamily::RepPhase, 7, 4))), ValidationError);
}

}  // namespace
}  // namespace repstab

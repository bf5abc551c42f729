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

#include "repstab/decoder.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>
#include <set>

#include "repstab/errors.h"

using namespace repstab;

namespace {

DetectionTensor tensor_with(const CodeLayout &L, std::vector<uint32_t> events) {
    std::sort(events.begin(), events.end());
    DetectionTensor t;
    t.events = events;
    t.final_flips = consistent_final_flips(L, events);
    t.observable = (std::popcount(t.final_flips & L.logical_mask()) & 1) != 0;
    return t;
}

std::vector<double> group_values(const MatchingGraph &g, EdgeClass c, bool final_round) {
    std::vector<double> out;
    for (const GraphEdge &e : g.edges()) {
        if (e.cls == c && (g.layout().node_t(e.a) == g.layout().rounds) == final_round) {
            out.push_back(e.p);
        }
    }
    return out;
}

double class_mean(const MatchingGraph &g, EdgeClass c) {
    auto v = group_values(g, c, false);
    double s = 0;
    for (double x : v) {
        s += x;
    }
    return s / v.size();
}

}  // namespace

TEST(decoder, uniform_weights) {
    CodeLayout L = layout_of(CodeSpec::repetition(CodeFamily::RepBit, 5, 4));
    MatchingGraph g = weights_uniform(L, 0.1);
    for (const GraphEdge &e : g.edges()) {
        EXPECT_NEAR(e.weight, 2.302585, 1e-6);
        EXPECT_GT(e.weight, 0);
    }
    EXPECT_THROW(weights_uniform(L, 0.0), ValidationError);
    EXPECT_THROW(weights_uniform(layout_of(CodeSpec::surface2(Basis::Z, 3)), 0.1), ValidationError);
}

TEST(decoder, skeleton_covers_every_single_error) {
    for (CodeFamily f : {CodeFamily::RepBit, CodeFamily::RepPhase}) {
        CodeSpec spec = CodeSpec::repetition(f, 3, 2);
        CodeLayout L = layout_of(spec);
        auto edges = MatchingGraph::skeleton(L);
        std::set<std::pair<uint32_t, uint32_t>> present;
        std::set<EdgeClass> classes;
        std::set<int32_t> boundary_corrections;
        for (const GraphEdge &e : edges) {
            present.insert({e.a, e.b});
            classes.insert(e.cls);
            if (e.cls == EdgeClass::Boundary) {
                boundary_corrections.insert(e.correction);
            }
            if (e.cls == EdgeClass::T) {
                EXPECT_EQ(e.correction, -1);
            } else {
                EXPECT_GE(e.correction, 0);
            }
        }
        EXPECT_EQ(classes, (std::set<EdgeClass>{EdgeClass::S, EdgeClass::T, EdgeClass::ST, EdgeClass::Boundary}));
        EXPECT_EQ(boundary_corrections, (std::set<int32_t>{0, 2}));
        for (const ErrorMechanism &m : error_mechanisms(spec, NoiseModel::bit_flip_budget())) {
            ASSERT_LE(m.nodes.size(), 2u);
            if (m.nodes.size() == 2) {
                EXPECT_TRUE(present.count({m.nodes[0], m.nodes[1]})) << m.nodes[0] << "," << m.nodes[1];
            } else if (m.nodes.size() == 1) {
                EXPECT_TRUE(present.count({m.nodes[0], kBoundaryNode}));
            }
        }
    }
}

TEST(decoder, edge_corrections_match_mechanisms) {
    // Every single error fires an edge whose correction undoes its effect.
    CodeSpec spec = CodeSpec::repetition(CodeFamily::RepPhase, 5, 3);
    CodeLayout L = layout_of(spec);
    MatchingGraph g = weights_first_principles(spec, NoiseModel::phase_flip_budget());
    Decoder dec(g);
    for (const ErrorMechanism &m : error_mechanisms(spec, NoiseModel::phase_flip_budget())) {
        DetectionTensor t;
        t.events = m.nodes;
        t.final_flips = m.final_flips;
        t.observable = m.observable;
        DecodeResult r = dec.decode(t);
        EXPECT_FALSE(r.logical_error);
    }
}

TEST(decoder, zero_detections) {
    CodeLayout L = layout_of(CodeSpec::repetition(CodeFamily::RepPhase, 7, 5));
    DecodeResult r = mwpm_decode(DetectionTensor{}, weights_uniform(L));
    EXPECT_TRUE(r.matches.empty());
    EXPECT_EQ(r.correction, 0u);
    EXPECT_FALSE(r.logical_error);
    EXPECT_EQ(r.weight, 0.0);
}

TEST(decoder, spacelike_pair_corrects_one_data_qubit) {
    CodeLayout L = layout_of(CodeSpec::repetition(CodeFamily::RepBit, 7, 5));
    MatchingGraph g = weights_uniform(L);
    for (uint32_t s = 0; s + 1 < L.n_measure; ++s) {
        DetectionTensor t;
        t.events = {L.node(s, 2), L.node(s + 1, 2)};
        t.final_flips = uint64_t{1} << (s + 1);
        DecodeResult r = mwpm_decode(t, g);
        EXPECT_EQ(r.correction, uint64_t{1} << (s + 1));
        EXPECT_EQ(t.final_flips ^ r.correction, 0u);
        EXPECT_FALSE(r.logical_error);
        ASSERT_EQ(r.matches.size(), 1u);
    }
}

TEST(decoder, rejects_events_outside_the_graph) {
    CodeLayout L = layout_of(CodeSpec::repetition(CodeFamily::RepBit, 3, 2));
    DetectionTensor t;
    t.events = {100};
    EXPECT_THROW(mwpm_decode(t, weights_uniform(L)), ValidationError);
}

TEST(decoder, matches_exhaustive_search_on_small_instances) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 400; ++trial) {
        uint32_t d = 3 + 2 * static_cast<uint32_t>(rng() % 4);
        CodeLayout L = layout_of(CodeSpec::repetition(CodeFamily::RepPhase, d, 2 + rng() % 8));
        auto edges = MatchingGraph::skeleton(L);
        std::uniform_real_distribution<double> u(0.001, 0.3);
        std::vector<double> raw(edges.size());
        for (double &x : raw) {
            x = u(rng);
        }
        MatchingGraph g(L, raw);
        std::set<uint32_t> ev;
        size_t k = 1 + rng() % std::min<size_t>(8, L.n_nodes());
        while (ev.size() < k) {
            ev.insert(static_cast<uint32_t>(rng() % L.n_nodes()));
        }
        DetectionTensor t = tensor_with(L, {ev.begin(), ev.end()});
        DecodeResult r = mwpm_decode(t, g);
        ASSERT_EQ(r.weight_q, exhaustive_matching_weight(g, t.events)) << "trial " << trial;
        std::set<uint32_t> seen;
        for (auto [a, b] : r.matches) {
            EXPECT_TRUE(seen.insert(a).second);
            if (b != kBoundaryNode) {
                EXPECT_TRUE(seen.insert(b).second);
            }
        }
        EXPECT_EQ(seen, ev);
    }
}

TEST(decoder, uniform_distances_count_hops) {
    CodeLayout L = layout_of(CodeSpec::repetition(CodeFamily::RepBit, 5, 6));
    MatchingGraph g = weights_uniform(L, 0.05);
    int64_t w = g.quantized(0);
    // Breadth-first hop counts over the same lattice.
    std::vector<std::vector<uint32_t>> adj(L.n_nodes());
    for (const GraphEdge &e : g.edges()) {
        if (e.b != kBoundaryNode) {
            adj[e.a].push_back(e.b);
            adj[e.b].push_back(e.a);
        }
    }
    for (uint32_t src = 0; src < L.n_nodes(); ++src) {
        std::vector<int> hops(L.n_nodes(), -1);
        std::queue<uint32_t> q;
        hops[src] = 0;
        q.push(src);
        while (!q.empty()) {
            uint32_t v = q.front();
            q.pop();
            for (uint32_t x : adj[v]) {
                if (hops[x] < 0) {
                    hops[x] = hops[v] + 1;
                    q.push(x);
                }
            }
        }
        for (uint32_t v = 0; v < L.n_nodes(); ++v) {
            ASSERT_EQ(g.row(src).dist[v], hops[v] * w);
        }
    }
}

TEST(decoder, deterministic) {
    CodeSpec spec = CodeSpec::repetition(CodeFamily::RepBit, 7, 10);
    DetectionSampler sampler(spec, NoiseModel::bit_flip_budget(), 3);
    DetectionSet set = sampler.sample_set(300);
    MatchingGraph a = weights_bootstrap(set), b = weights_bootstrap(set);
    ASSERT_EQ(a.edges().size(), b.edges().size());
    for (size_t e = 0; e < a.edges().size(); ++e) {
        EXPECT_EQ(a.edges()[e].p, b.edges()[e].p);
    }
    Decoder d1(a), d2(a);
    for (const auto &t : set.shots) {
        DecodeResult r1 = d1.decode(t), r2 = d2.decode(t);
        EXPECT_EQ(r1.matches, r2.matches);
        EXPECT_EQ(r1.correction, r2.correction);
    }
}

TEST(decoder, bootstrap_with_timelike_training_only) {
    CodeLayout L = layout_of(CodeSpec::repetition(CodeFamily::RepPhase, 5, 6));
    DetectionSet set;
    set.layout = L;
    for (uint32_t k = 0; k < 200; ++k) {
        uint32_t s = k % L.n_measure, t = k % L.rounds;
        set.shots.push_back(tensor_with(L, {L.node(s, t), L.node(s, t + 1)}));
    }
    MatchingGraph g = weights_bootstrap(set);
    for (const GraphEdge &e : g.edges()) {
        if (e.cls == EdgeClass::T) {
            EXPECT_GT(e.p, 1e-3);
        } else {
            EXPECT_EQ(e.p, MatchingGraph::kFloor);
        }
    }
}

TEST(decoder, pij_weights_recover_planted_edges) {
    CodeLayout L = layout_of(CodeSpec::repetition(CodeFamily::RepBit, 5, 8));
    auto edges = MatchingGraph::skeleton(L);
    auto group = MatchingGraph::groups(L, edges);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.005, 0.04);
    std::vector<double> truth_group(*std::max_element(group.begin(), group.end()) + 1);
    for (double &x : truth_group) {
        x = u(rng);
    }
    const size_t N = 40000;
    DetectionSet set;
    set.layout = L;
    std::uniform_real_distribution<double> coin(0, 1);
    for (size_t k = 0; k < N; ++k) {
        std::vector<uint8_t> fired(L.n_nodes(), 0);
        for (size_t e = 0; e < edges.size(); ++e) {
            if (coin(rng) < truth_group[group[e]]) {
                fired[edges[e].a] ^= 1;
                if (edges[e].b != kBoundaryNode) {
                    fired[edges[e].b] ^= 1;
                }
            }
        }
        std::vector<uint32_t> ev;
        for (uint32_t i = 0; i < L.n_nodes(); ++i) {
            if (fired[i]) {
                ev.push_back(i);
            }
        }
        set.shots.push_back(tensor_with(L, ev));
    }
    CorrelationMatrix m = pij_exact(set);
    MatchingGraph g = weights_pij(m, L);
    for (size_t e = 0; e < edges.size(); ++e) {
        const GraphEdge &ge = g.edges()[e];
        double x = m.def(ge.a);
        double sigma = noise_floor(x, x, truth_group[group[e]], N);
        EXPECT_NEAR(ge.p, truth_group[group[e]], 2 * sigma) << edge_class_name(ge.cls) << " " << e;
    }
}

TEST(decoder, pij_weights_at_floor_without_noise) {
    CodeSpec spec = CodeSpec::repetition(CodeFamily::RepBit, 5, 4);
    DetectionSampler sampler(spec, NoiseModel::zero(), 1);
    MatchingGraph g = weights_pij(sampler.sample_set(100));
    for (const GraphEdge &e : g.edges()) {
        EXPECT_EQ(e.p, MatchingGraph::kFloor);
    }
}

TEST(decoder, first_principles_single_mechanism) {
    CodeSpec spec = CodeSpec::repetition(CodeFamily::RepPhase, 5, 6);
    NoiseModel n = NoiseModel::from_rates(0, 0, 0.01, 0, 0, 0);
    MatchingGraph g = weights_first_principles(spec, n);
    for (const GraphEdge &e : g.edges()) {
        bool final_readout = e.cls != EdgeClass::T && g.layout().node_t(e.a) == spec.rounds;
        if (e.cls == EdgeClass::T || (final_readout && e.cls != EdgeClass::ST)) {
            // Stabilizer readout errors, and data readout errors in the final round.
            EXPECT_NEAR(e.p, 0.01, 1e-12) << edge_class_name(e.cls);
        } else {
            EXPECT_EQ(e.p, MatchingGraph::kFloor) << edge_class_name(e.cls);
        }
    }
}

TEST(decoder, phase_flip_spacelike_edges_dominated_by_dd) {
    CodeSpec spec = CodeSpec::repetition(CodeFamily::RepPhase, 7, 10);
    NoiseModel full = NoiseModel::phase_flip_budget();
    NoiseModel dd = NoiseModel::from_rates(full.x[0], 0, 0, 0, 0, 0);
    double s_full = class_mean(weights_first_principles(spec, full), EdgeClass::S);
    double s_dd = class_mean(weights_first_principles(spec, dd), EdgeClass::S);
    EXPECT_GT(s_dd / s_full, 0.5);
    for (size_t c = 1; c < kNumComponents; ++c) {
        NoiseModel only;
        only.x[c] = full.x[c];
        EXPECT_LT(class_mean(weights_first_principles(spec, only), EdgeClass::S), s_dd);
    }
}

TEST(decoder, first_principles_agrees_with_pij_from_simulation) {
    CodeSpec spec = CodeSpec::repetition(CodeFamily::RepPhase, 7, 20);
    NoiseModel n = NoiseModel::phase_flip_budget();
    DetectionSampler sampler(spec, n, 8);
    MatchingGraph fp = weights_first_principles(spec, n);
    MatchingGraph pij = weights_pij(sampler.sample_set(30000));
    for (EdgeClass c : {EdgeClass::S, EdgeClass::T, EdgeClass::ST, EdgeClass::Boundary}) {
        double a = class_mean(fp, c), b = class_mean(pij, c);
        EXPECT_NEAR(b / a, 1.0, 0.15) << edge_class_name(c) << " " << a << " " << b;
    }
}

TEST(decoder, zero_noise_has_no_logical_errors) {
    for (CodeFamily f : {CodeFamily::RepBit, CodeFamily::RepPhase}) {
        CodeSpec spec = CodeSpec::repetition(f, 5, 7);
        DetectionSampler sampler(spec, NoiseModel::zero(), 2);
        DetectionSet set = sampler.sample_set(200);
        LogicalRate r = logical_error_rate(set.shots, weights_uniform(set.layout));
        EXPECT_EQ(r.errors, 0u);
        EXPECT_EQ(r.p, 0.0);
    }
}

TEST(decoder, large_graphs_decode_without_precomputed_rows) {
    CodeSpec spec = CodeSpec::repetition(CodeFamily::RepBit, 5, 600);
    DetectionSampler sampler(spec, NoiseModel::bit_flip_budget().scaled(0.3), 2);
    DetectionSet set = sampler.sample_set(5);
    MatchingGraph g = weights_uniform(set.layout);
    EXPECT_FALSE(g.precomputed());
    Decoder dec(g);
    for (const auto &t : set.shots) {
        EXPECT_NO_THROW(dec.decode(t));
    }
}

TEST(decoder, binomial_standard_error) {
    LogicalRate r = binomial_rate(25, 100);
    EXPECT_DOUBLE_EQ(r.p, 0.25);
    EXPECT_NEAR(r.se, std::sqrt(0.25 * 0.75 / 100), 1e-15);
    EXPECT_THROW(binomial_rate(0, 0), ValidationError);
    EXPECT_EQ(parse_weighting("first-principles"), Weighting::FirstPrinciples);
    EXPECT_THROW(parse_weighting("greedy"), ValidationError);
}

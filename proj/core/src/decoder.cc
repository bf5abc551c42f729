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

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <queue>
#include <tuple>

#include "repstab/blossom.h"
#include "repstab/errors.h"

namespace repstab {

namespace {

constexpr uint32_t kNone = UINT32_MAX;
constexpr uint32_t kPrecomputeLimit = 2048;

void require_repetition(const CodeLayout &layout) {
    if (layout.family == CodeFamily::Surface2) {
        throw ValidationError("matching decoder is defined for repetition codes");
    }
}

uint32_t other_end(const GraphEdge &e, uint32_t v) { return e.a == v ? e.b : e.a; }

}  // namespace

std::vector<GraphEdge> MatchingGraph::skeleton(const CodeLayout &L) {
    require_repetition(L);
    const uint32_t S = L.n_measure, T = L.rounds + 1;
    std::vector<GraphEdge> out;
    auto add = [&](uint32_t a, uint32_t b, EdgeClass c, int32_t corr) { out.push_back({a, b, c, corr, 0.0, 0.0}); };
    for (uint32_t t = 0; t < T; ++t) {
        for (uint32_t s = 0; s + 1 < S; ++s) {
            add(L.node(s, t), L.node(s + 1, t), EdgeClass::S, static_cast<int32_t>(s + 1));
        }
        add(L.node(0, t), kBoundaryNode, EdgeClass::Boundary, 0);
        add(L.node(S - 1, t), kBoundaryNode, EdgeClass::Boundary, static_cast<int32_t>(S));
        if (t + 1 < T) {
            for (uint32_t s = 0; s < S; ++s) {
                add(L.node(s, t), L.node(s, t + 1), EdgeClass::T, -1);
            }
            for (uint32_t s = 0; s + 1 < S; ++s) {
                add(L.node(s, t), L.node(s + 1, t + 1), EdgeClass::ST, static_cast<int32_t>(s + 1));
            }
        }
    }
    return out;
}

namespace {

using GroupKey = std::tuple<int, uint32_t, bool>;

GroupKey group_key(const CodeLayout &L, const GraphEdge &e) {
    bool final_readout = (e.cls == EdgeClass::S || e.cls == EdgeClass::Boundary) && L.node_t(e.a) == L.rounds;
    // Boundary edges on the right are told apart by their correction.
    uint32_t column = e.cls == EdgeClass::Boundary ? static_cast<uint32_t>(e.correction) : L.node_s(e.a);
    return {static_cast<int>(e.cls), column, final_readout};
}

}  // namespace

std::vector<uint32_t> MatchingGraph::groups(const CodeLayout &L, const std::vector<GraphEdge> &edges) {
    std::map<GroupKey, uint32_t> ids;
    std::vector<uint32_t> out;
    out.reserve(edges.size());
    for (const GraphEdge &e : edges) {
        auto it = ids.emplace(group_key(L, e), static_cast<uint32_t>(ids.size())).first;
        out.push_back(it->second);
    }
    return out;
}

MatchingGraph MatchingGraph::retarget(const CodeLayout &other) const {
    if (other.family != layout_.family || other.distance != layout_.distance) {
        throw ValidationError("retarget needs the same code");
    }
    std::map<GroupKey, double> p;
    for (const GraphEdge &e : edges_) {
        p[group_key(layout_, e)] = e.p;
    }
    auto target = skeleton(other);
    std::vector<double> raw;
    raw.reserve(target.size());
    for (const GraphEdge &e : target) {
        auto it = p.find(group_key(other, e));
        if (it == p.end()) {
            throw ValidationError("retarget: edge group missing from the trained graph");
        }
        raw.push_back(it->second);
    }
    return MatchingGraph(other, raw);
}

MatchingGraph::MatchingGraph(const CodeLayout &layout, const std::vector<double> &raw)
    : layout_(layout), n_(layout.n_nodes()), edges_(skeleton(layout)) {
    if (raw.size() != edges_.size()) {
        throw ValidationError("edge probability vector does not match the graph");
    }
    auto group = groups(layout_, edges_);
    uint32_t n_groups = group.empty() ? 0 : *std::max_element(group.begin(), group.end()) + 1;
    std::vector<double> sum(n_groups, 0.0);
    std::vector<uint32_t> count(n_groups, 0);
    for (size_t e = 0; e < edges_.size(); ++e) {
        if (!std::isfinite(raw[e])) {
            throw NumericError("non-finite edge probability");
        }
        sum[group[e]] += raw[e];
        ++count[group[e]];
    }
    wq_.resize(edges_.size());
    adj_.assign(n_, {});
    for (size_t e = 0; e < edges_.size(); ++e) {
        GraphEdge &g = edges_[e];
        g.p = std::clamp(sum[group[e]] / count[group[e]], kFloor, 0.5);
        g.weight = -std::log(g.p);
        wq_[e] = std::llround(g.weight * kScale);
        if (g.b == kBoundaryNode) {
            boundary_edges_.push_back(static_cast<uint32_t>(e));
        } else {
            adj_[g.a].push_back({g.b, static_cast<uint32_t>(e)});
            adj_[g.b].push_back({g.a, static_cast<uint32_t>(e)});
        }
    }
    compute_row(kBoundaryNode, boundary_row_);
    if (n_ <= kPrecomputeLimit) {
        rows_.resize(n_);
        for (uint32_t v = 0; v < n_; ++v) {
            compute_row(v, rows_[v]);
        }
    }
}

void MatchingGraph::compute_row(uint32_t src, PathRow &out) const {
    constexpr int64_t inf = INT64_MAX / 4;
    out.dist.assign(n_, inf);
    out.via.assign(n_, kNone);
    using Item = std::pair<int64_t, uint32_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    if (src == kBoundaryNode) {
        for (uint32_t e : boundary_edges_) {
            uint32_t v = edges_[e].a;
            if (wq_[e] < out.dist[v]) {
                out.dist[v] = wq_[e];
                out.via[v] = e;
                pq.push({wq_[e], v});
            }
        }
    } else {
        out.dist[src] = 0;
        pq.push({0, src});
    }
    while (!pq.empty()) {
        auto [d, v] = pq.top();
        pq.pop();
        if (d != out.dist[v]) {
            continue;
        }
        for (auto [w, e] : adj_[v]) {
            int64_t nd = d + wq_[e];
            if (nd < out.dist[w]) {
                out.dist[w] = nd;
                out.via[w] = e;
                pq.push({nd, w});
            }
        }
    }
}

const PathRow &MatchingGraph::row(uint32_t src) const {
    if (src == kBoundaryNode) {
        return boundary_row_;
    }
    if (rows_.empty()) {
        throw ValidationError("shortest-path rows are not precomputed for this graph size");
    }
    return rows_.at(src);
}

const PathRow &Decoder::row(uint32_t src) {
    if (src == kBoundaryNode || g_.precomputed()) {
        return g_.row(src);
    }
    auto it = cache_.find(src);
    if (it == cache_.end()) {
        it = cache_.emplace(src, PathRow{}).first;
        g_.compute_row(src, it->second);
    }
    return it->second;
}

void Decoder::path_edges(uint32_t a, uint32_t b, std::vector<uint32_t> &out) {
    const auto &E = g_.edges();
    if (b == kBoundaryNode) {
        const PathRow &r = g_.row(kBoundaryNode);
        uint32_t v = a;
        while (v != kBoundaryNode) {
            uint32_t e = r.via[v];
            out.push_back(e);
            v = other_end(E[e], v);
        }
        return;
    }
    const PathRow &r = row(a);
    uint32_t v = b;
    while (v != a) {
        uint32_t e = r.via[v];
        out.push_back(e);
        v = other_end(E[e], v);
    }
}

DecodeResult Decoder::decode(const DetectionTensor &t) {
    if (cache_.size() > 4096) {
        cache_.clear();
    }
    DecodeResult res;
    const auto &ev = t.events;
    const uint32_t k = static_cast<uint32_t>(ev.size());
    for (uint32_t e : ev) {
        if (e >= g_.n_nodes()) {
            throw ValidationError("detection event outside the matching graph");
        }
    }
    const PathRow &brow = g_.row(kBoundaryNode);
    std::vector<int64_t> b(k);
    for (uint32_t i = 0; i < k; ++i) {
        b[i] = brow.dist[ev[i]];
    }
    // Pairs that can beat sending both events to the boundary.
    std::vector<std::tuple<uint32_t, uint32_t, int64_t>> pairs;
    std::vector<uint32_t> uf(k);
    std::iota(uf.begin(), uf.end(), 0);
    std::function<uint32_t(uint32_t)> find = [&](uint32_t x) { return uf[x] == x ? x : uf[x] = find(uf[x]); };
    for (uint32_t i = 0; i < k; ++i) {
        const PathRow &ri = row(ev[i]);
        for (uint32_t j = i + 1; j < k; ++j) {
            int64_t d = ri.dist[ev[j]];
            if (d < b[i] + b[j]) {
                pairs.emplace_back(i, j, d);
                uf[find(i)] = find(j);
            }
        }
    }
    std::vector<std::vector<uint32_t>> comps(k);
    for (uint32_t i = 0; i < k; ++i) {
        comps[find(i)].push_back(i);
    }
    std::vector<std::vector<std::tuple<uint32_t, uint32_t, int64_t>>> comp_pairs(k);
    for (const auto &p : pairs) {
        comp_pairs[find(std::get<0>(p))].push_back(p);
    }
    std::vector<int32_t> local(k, -1);
    std::vector<WeightedEdge> wedges;
    for (uint32_t root = 0; root < k; ++root) {
        const auto &c = comps[root];
        if (c.empty()) {
            continue;
        }
        if (c.size() == 1) {
            res.matches.push_back({ev[c[0]], kBoundaryNode});
            res.weight_q += b[c[0]];
            continue;
        }
        if (c.size() == 2) {
            res.matches.push_back({ev[c[0]], ev[c[1]]});
            res.weight_q += std::get<2>(comp_pairs[root][0]);
            continue;
        }
        const int32_t m = static_cast<int32_t>(c.size());
        for (int32_t r = 0; r < m; ++r) {
            local[c[r]] = r;
        }
        wedges.clear();
        for (const auto &[i, j, d] : comp_pairs[root]) {
            wedges.push_back({local[i], local[j], d});
        }
        for (int32_t r = 0; r < m; ++r) {
            wedges.push_back({r, m + r, b[c[r]]});
            for (int32_t r2 = r + 1; r2 < m; ++r2) {
                wedges.push_back({m + r, m + r2, 0});
            }
        }
        auto mate = min_weight_perfect_matching(2 * m, wedges);
        for (int32_t r = 0; r < m; ++r) {
            int32_t q = mate[r];
            if (q == m + r) {
                res.matches.push_back({ev[c[r]], kBoundaryNode});
                res.weight_q += b[c[r]];
            } else if (q < m && q > r) {
                res.matches.push_back({ev[c[r]], ev[c[q]]});
                res.weight_q += row(ev[c[r]]).dist[ev[c[q]]];
            } else if (q >= m) {
                throw NumericError("matching paired an event with a foreign boundary image");
            }
        }
    }
    std::vector<uint32_t> path;
    for (const auto &[a, bb] : res.matches) {
        path.clear();
        path_edges(a, bb, path);
        for (uint32_t e : path) {
            int32_t corr = g_.edges()[e].correction;
            if (corr >= 0) {
                res.correction ^= uint64_t{1} << corr;
            }
        }
    }
    res.weight = static_cast<double>(res.weight_q) / MatchingGraph::kScale;
    const CodeLayout &L = g_.layout();
    res.logical_error = t.observable ^ static_cast<bool>(std::popcount(res.correction & L.logical_mask()) & 1);
    uint64_t corrected = t.final_flips ^ res.correction;
    for (uint32_t s = 0; s < L.n_measure; ++s) {
        if (std::popcount(corrected & L.support_mask(s)) & 1) {
            throw NumericError("correction leaves a stabilizer of the final readout violated");
        }
    }
    return res;
}

DecodeResult mwpm_decode(const DetectionTensor &t, const MatchingGraph &graph) {
    Decoder d(graph);
    return d.decode(t);
}

int64_t exhaustive_matching_weight(const MatchingGraph &graph, const std::vector<uint32_t> &events) {
    const size_t k = events.size();
    if (k > 16) {
        throw ValidationError("exhaustive matching is limited to 16 events");
    }
    Decoder dec(graph);
    std::vector<int64_t> b(k);
    std::vector<std::vector<int64_t>> d(k, std::vector<int64_t>(k, 0));
    for (size_t i = 0; i < k; ++i) {
        b[i] = graph.row(kBoundaryNode).dist[events[i]];
        std::vector<uint32_t> path;
        for (size_t j = 0; j < k; ++j) {
            if (j != i) {
                path.clear();
                dec.path_edges(events[i], events[j], path);
                for (uint32_t e : path) {
                    d[i][j] += graph.quantized(e);
                }
            }
        }
    }
    std::vector<char> used(k, 0);
    std::function<int64_t()> rec = [&]() -> int64_t {
        size_t i = 0;
        while (i < k && used[i]) {
            ++i;
        }
        if (i == k) {
            return 0;
        }
        used[i] = 1;
        int64_t best = b[i] + rec();
        for (size_t j = i + 1; j < k; ++j) {
            if (!used[j]) {
                used[j] = 1;
                best = std::min(best, d[i][j] + rec());
                used[j] = 0;
            }
        }
        used[i] = 0;
        return best;
    };
    return rec();
}

uint64_t consistent_final_flips(const CodeLayout &layout, const std::vector<uint32_t> &events) {
    require_repetition(layout);
    std::vector<uint8_t> column(layout.n_measure, 0);
    for (uint32_t e : events) {
        column[layout.node_s(e)] ^= 1;
    }
    uint64_t f = 0;
    uint8_t bit = 0;
    for (uint32_t s = 0; s < layout.n_measure; ++s) {
        bit ^= column[s];
        f |= uint64_t{bit} << (s + 1);
    }
    return f;
}

LogicalRate binomial_rate(uint64_t errors, uint64_t shots) {
    if (shots == 0) {
        throw ValidationError("logical error rate needs at least one shot");
    }
    LogicalRate r;
    r.errors = errors;
    r.shots = shots;
    r.p = static_cast<double>(errors) / static_cast<double>(shots);
    r.se = std::sqrt(r.p * (1 - r.p) / static_cast<double>(shots));
    return r;
}

LogicalRate logical_error_rate(const std::vector<DetectionTensor> &shots, const MatchingGraph &graph) {
    Decoder dec(graph);
    uint64_t errors = 0;
    for (const auto &t : shots) {
        errors += dec.decode(t).logical_error;
    }
    return binomial_rate(errors, shots.size());
}

MatchingGraph weights_uniform(const CodeLayout &layout, double p) {
    if (!(p > 0 && p <= 0.5)) {
        throw ValidationError("uniform edge probability must be in (0, 0.5]");
    }
    return MatchingGraph(layout, std::vector<double>(MatchingGraph::skeleton(layout).size(), p));
}

MatchingGraph weights_bootstrap(const DetectionSet &training) {
    if (training.shots.empty()) {
        throw ValidationError("bootstrap weighting needs training shots");
    }
    MatchingGraph uniform = weights_uniform(training.layout);
    Decoder dec(uniform);
    std::vector<uint64_t> count(uniform.edges().size(), 0);
    std::vector<uint32_t> path;
    for (const auto &t : training.shots) {
        for (const auto &[a, b] : dec.decode(t).matches) {
            path.clear();
            dec.path_edges(a, b, path);
            for (uint32_t e : path) {
                ++count[e];
            }
        }
    }
    std::vector<double> raw(count.size());
    for (size_t e = 0; e < raw.size(); ++e) {
        raw[e] = static_cast<double>(count[e]) / static_cast<double>(training.shots.size());
    }
    return MatchingGraph(training.layout, raw);
}

MatchingGraph weights_pij(const CorrelationMatrix &m, const CodeLayout &layout) {
    auto edges = MatchingGraph::skeleton(layout);
    if (m.n_nodes != layout.n_nodes()) {
        throw ValidationError("correlation matrix does not match the code layout");
    }
    std::vector<double> boundary(layout.n_nodes(), MatchingGraph::kFloor);
    for (const BoundaryEstimate &b : boundary_edge_probs(m, layout)) {
        boundary[b.node] = b.flagged ? MatchingGraph::kFloor : b.p;
    }
    std::vector<double> raw(edges.size());
    for (size_t e = 0; e < edges.size(); ++e) {
        const GraphEdge &g = edges[e];
        if (g.b == kBoundaryNode) {
            raw[e] = boundary[g.a];
        } else {
            double v = m.p(g.a, g.b);
            raw[e] = m.flagged(g.a, g.b) || v < MatchingGraph::kFloor ? MatchingGraph::kFloor : v;
        }
    }
    return MatchingGraph(layout, raw);
}

MatchingGraph weights_pij(const DetectionSet &training) { return weights_pij(pij_exact(training), training.layout); }

MatchingGraph weights_first_principles(const CodeSpec &spec, const NoiseModel &noise) {
    CodeLayout layout = layout_of(spec);
    auto edges = MatchingGraph::skeleton(layout);
    const uint64_t n = layout.n_nodes();
    std::unordered_map<uint64_t, uint32_t> index;
    for (uint32_t e = 0; e < edges.size(); ++e) {
        uint64_t b = edges[e].b == kBoundaryNode ? n : edges[e].b;
        index[edges[e].a * (n + 1) + b] = e;
    }
    std::vector<double> raw(edges.size(), 0.0);
    for (const ErrorMechanism &mech : error_mechanisms(spec, noise)) {
        uint64_t key;
        if (mech.nodes.size() == 1) {
            key = mech.nodes[0] * (n + 1) + n;
        } else if (mech.nodes.size() == 2) {
            key = mech.nodes[0] * (n + 1) + mech.nodes[1];
        } else {
            continue;  // undetectable or hyperedge
        }
        auto it = index.find(key);
        if (it != index.end()) {
            raw[it->second] = g_fold(raw[it->second], mech.probability);
        }
    }
    return MatchingGraph(layout, raw);
}

const char *weighting_name(Weighting w) {
    switch (w) {
        case Weighting::Uniform:
            return "uniform";
        case Weighting::Bootstrap:
            return "bootstrap";
        case Weighting::Pij:
            return "pij";
        case Weighting::FirstPrinciples:
            return "first-principles";
    }
    return "?";
}

Weighting parse_weighting(const std::string &name) {
    for (Weighting w : {Weighting::Uniform, Weighting::Bootstrap, Weighting::Pij, Weighting::FirstPrinciples}) {
        if (name == weighting_name(w)) {
            return w;
        }
    }
    throw ValidationError("unknown weighting: " + name);
}

}  // namespace repstab

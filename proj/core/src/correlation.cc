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

#include "repstab/correlation.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "repstab/errors.h"

namespace repstab {

PairMoments forward_moments(double pi, double pj, double pij) {
    return {g_fold(pi, pij), g_fold(pj, pij), pij * (1 - pi) * (1 - pj) + (1 - pij) * pi * pj};
}

PairEstimate pij_exact(double xi, double xj, double xij) {
    PairEstimate e;
    double denom = 1 - 2 * xi - 2 * xj + 4 * xij;
    if (!(xi < 0.5 && xj < 0.5) || !(denom > 0)) {
        e.flagged = true;
        e.pij = 0.5;
        return e;
    }
    double y = 4 * (xij - xi * xj) / denom;
    double rad = 1 - y;
    if (rad < 0) {
        e.flagged = true;
        rad = 0;
        y = 1;
    }
    // 1/2 - sqrt(rad)/2 without the cancellation at small y.
    e.pij = y / (2 * (1 + std::sqrt(rad)));
    if (e.pij >= 0.5) {
        return e;
    }
    e.pi = (xi - e.pij) / (1 - 2 * e.pij);
    e.pj = (xj - e.pij) / (1 - 2 * e.pij);
    return e;
}

double pij_approx(double xi, double xj, double xij) {
    return (xij - xi * xj) / ((1 - 2 * xi) * (1 - 2 * xj));
}

double noise_floor(double xi, double xj, double pij, uint64_t n) {
    if (n < 1) {
        throw ValidationError("noise floor needs at least one shot");
    }
    double a = (1 - 2 * xi) * (1 - 2 * xj);
    return std::sqrt(std::max(pij, 0.0) + xi * xj / (a * a)) / std::sqrt(static_cast<double>(n));
}

PairAccumulator::PairAccumulator(uint32_t n_nodes)
    : n_(n_nodes), pairs_(static_cast<size_t>(n_nodes) * (n_nodes + 1) / 2, 0) {}

void PairAccumulator::add(const DetectionTensor &t) {
    const auto &ev = t.events;
    for (size_t a = 0; a < ev.size(); ++a) {
        if (ev[a] >= n_) {
            throw ValidationError("detection event outside the accumulator");
        }
        uint64_t *row = &pairs_[index(ev[a], ev[a])];
        for (size_t b = a; b < ev.size(); ++b) {
            ++row[ev[b] - ev[a]];
        }
    }
    ++shots_;
}

void PairAccumulator::add(const DetectionSet &set) {
    for (const auto &t : set.shots) {
        add(t);
    }
}

void PairAccumulator::merge(const PairAccumulator &other) {
    if (other.n_ != n_) {
        throw ValidationError("cannot merge accumulators of different size");
    }
    for (size_t k = 0; k < pairs_.size(); ++k) {
        pairs_[k] += other.pairs_[k];
    }
    shots_ += other.shots_;
}

double CorrelationMatrix::sigma(uint32_t i, uint32_t j) const {
    return noise_floor(def(i), def(j), p(i, j), n_shots);
}

uint32_t CorrelationMatrix::position(uint32_t node, NodeOrder order) const {
    if (order == NodeOrder::SpaceFirst) {
        return node;
    }
    return node / n_measure + n_rounds * (node % n_measure);
}

uint32_t CorrelationMatrix::node_at(uint32_t pos, NodeOrder order) const {
    if (order == NodeOrder::SpaceFirst) {
        return pos;
    }
    return pos / n_rounds + n_measure * (pos % n_rounds);
}

namespace {

CorrelationMatrix build(const PairAccumulator &acc, const CodeLayout &layout, bool approximate) {
    if (acc.n_nodes() != layout.n_nodes()) {
        throw ValidationError("accumulator does not match the code layout");
    }
    if (acc.n_shots() < 2) {
        throw ValidationError("correlation estimate needs at least two shots");
    }
    CorrelationMatrix m;
    const uint32_t n = acc.n_nodes();
    m.n_nodes = n;
    m.n_measure = layout.n_measure;
    m.n_rounds = layout.rounds + 1;
    m.n_shots = acc.n_shots();
    m.approximate = approximate;
    m.values.assign(static_cast<size_t>(n) * n, 0.0);
    m.marginals.assign(static_cast<size_t>(n) * n, 0.0);
    m.flags.assign(static_cast<size_t>(n) * n, 0);
    const double inv = 1.0 / static_cast<double>(acc.n_shots());
    std::vector<double> x(n);
    for (uint32_t i = 0; i < n; ++i) {
        x[i] = static_cast<double>(acc.count(i)) * inv;
        m.values[static_cast<size_t>(i) * n + i] = x[i];
        m.flags[static_cast<size_t>(i) * n + i] = x[i] >= 0.5;
    }
    for (uint32_t i = 0; i < n; ++i) {
        for (uint32_t j = i + 1; j < n; ++j) {
            double xij = static_cast<double>(acc.count(i, j)) * inv;
            PairEstimate e = pij_exact(x[i], x[j], xij);
            double v = approximate ? pij_approx(x[i], x[j], xij) : e.pij;
            size_t ij = static_cast<size_t>(i) * n + j, ji = static_cast<size_t>(j) * n + i;
            m.values[ij] = m.values[ji] = v;
            m.flags[ij] = m.flags[ji] = e.flagged;
            m.marginals[ij] = e.pi;
            m.marginals[ji] = e.pj;
        }
    }
    return m;
}

PairAccumulator accumulate(const DetectionSet &set) {
    PairAccumulator acc(set.layout.n_nodes());
    acc.add(set);
    return acc;
}

void require_repetition(const CodeLayout &layout) {
    if (layout.family == CodeFamily::Surface2) {
        throw ValidationError("edge classification is defined for repetition codes");
    }
}

double median_of(std::vector<double> v) {
    if (v.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    size_t h = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + h, v.end());
    double hi = v[h];
    if (v.size() % 2) {
        return hi;
    }
    return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + h));
}

}  // namespace

CorrelationMatrix pij_exact(const PairAccumulator &acc, const CodeLayout &layout) { return build(acc, layout, false); }
CorrelationMatrix pij_exact(const DetectionSet &set) { return build(accumulate(set), set.layout, false); }
CorrelationMatrix pij_approx(const PairAccumulator &acc, const CodeLayout &layout) { return build(acc, layout, true); }
CorrelationMatrix pij_approx(const DetectionSet &set) { return build(accumulate(set), set.layout, true); }

void write_matrix_csv(std::ostream &out, const CorrelationMatrix &m, NodeOrder order) {
    out << "i,j,p_ij,sigma\n";
    out.precision(10);
    for (uint32_t a = 0; a < m.n_nodes; ++a) {
        uint32_t i = m.node_at(a, order);
        for (uint32_t b = a + 1; b < m.n_nodes; ++b) {
            uint32_t j = m.node_at(b, order);
            out << a << ',' << b << ',' << m.p(i, j) << ',' << m.sigma(i, j) << '\n';
        }
    }
    if (!out) {
        throw IoError("failed writing correlation matrix");
    }
}

const char *edge_class_name(EdgeClass c) {
    static constexpr const char *names[] = {"S", "T", "ST", "ST'", "2T", "3T", "4T", "5T", "B", "crosstalk"};
    return names[static_cast<size_t>(c)];
}

double edge_sum(const CorrelationMatrix &m, const CodeLayout &layout, uint32_t node) {
    require_repetition(layout);
    const int S = static_cast<int>(layout.n_measure), T = static_cast<int>(layout.rounds + 1);
    const int s = static_cast<int>(layout.node_s(node)), t = static_cast<int>(layout.node_t(node));
    static constexpr int offsets[6][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, -1}};
    double sum = 0;
    for (const auto &o : offsets) {
        int s2 = s + o[0], t2 = t + o[1];
        if (s2 < 0 || s2 >= S || t2 < 0 || t2 >= T) {
            continue;
        }
        uint32_t j = layout.node(static_cast<uint32_t>(s2), static_cast<uint32_t>(t2));
        if (!layout.masked(j)) {
            sum = g_fold(sum, m.p(node, j));
        }
    }
    return sum;
}

BoundaryEstimate boundary_from_edges(double x_i, const std::vector<double> &edges) {
    BoundaryEstimate b;
    for (double e : edges) {
        b.p_sum = g_fold(b.p_sum, e);
    }
    b.p = (x_i - b.p_sum) / (1 - 2 * b.p_sum);
    b.flagged = b.p < 0;
    return b;
}

std::vector<BoundaryEstimate> boundary_edge_probs(const CorrelationMatrix &m, const CodeLayout &layout) {
    require_repetition(layout);
    std::vector<BoundaryEstimate> out;
    for (uint32_t t = 0; t <= layout.rounds; ++t) {
        for (uint32_t s : {0u, layout.n_measure - 1}) {
            uint32_t i = layout.node(s, t);
            if (layout.masked(i) || (s > 0 && layout.n_measure == 1)) {
                continue;
            }
            BoundaryEstimate b;
            b.node = i;
            b.p_sum = edge_sum(m, layout, i);
            b.p = (m.def(i) - b.p_sum) / (1 - 2 * b.p_sum);
            b.flagged = b.p < 0;
            out.push_back(b);
        }
    }
    return out;
}

EdgeReport classify_edges(const CorrelationMatrix &m, const CodeLayout &layout) {
    require_repetition(layout);
    if (m.n_nodes != layout.n_nodes()) {
        throw ValidationError("matrix does not match the code layout");
    }
    EdgeReport r;
    auto push = [&](EdgeClass c, Edge e) { r.classes[static_cast<size_t>(c)].push_back(e); };
    const uint32_t S = layout.n_measure;
    struct Acc {
        double p = 0, sigma = 0;
        uint32_t k = 0;
    };
    std::vector<Acc> xt(static_cast<size_t>(S) * S);
    for (uint32_t a = 0; a < m.n_nodes; ++a) {
        if (layout.masked(a)) {
            continue;
        }
        const int sa = static_cast<int>(layout.node_s(a)), ta = static_cast<int>(layout.node_t(a));
        for (uint32_t b = a + 1; b < m.n_nodes; ++b) {
            if (layout.masked(b)) {
                continue;
            }
            const int ds = static_cast<int>(layout.node_s(b)) - sa, dt = static_cast<int>(layout.node_t(b)) - ta;
            if (dt > 5) {
                break;
            }
            Edge e{a, b, m.p(a, b), m.sigma(a, b), m.flagged(a, b)};
            if (dt == 0) {
                if (ds == 1) {
                    push(EdgeClass::S, e);
                } else {
                    push(EdgeClass::Crosstalk, e);
                    Acc &x = xt[static_cast<size_t>(sa) * S + static_cast<uint32_t>(sa + ds)];
                    x.p += e.p;
                    x.sigma += e.sigma;
                    ++x.k;
                }
            } else if (dt == 1) {
                if (ds == 0) {
                    push(EdgeClass::T, e);
                } else if (ds == 1) {
                    push(EdgeClass::ST, e);
                } else if (ds == -1) {
                    push(EdgeClass::STPrime, e);
                }
            } else if (ds == 0) {
                push(static_cast<EdgeClass>(static_cast<int>(EdgeClass::T2) + dt - 2), e);
            }
        }
    }
    for (const BoundaryEstimate &b : boundary_edge_probs(m, layout)) {
        double x = m.def(b.node);
        push(EdgeClass::Boundary, {b.node, kBoundaryNode, b.p, noise_floor(x, x, b.p, m.n_shots), b.flagged});
    }
    for (size_t c = 0; c < kNumEdgeClasses; ++c) {
        std::vector<double> v;
        for (const Edge &e : r.classes[c]) {
            v.push_back(e.p);
        }
        r.medians[c] = median_of(std::move(v));
    }
    for (uint32_t a = 0; a < S; ++a) {
        for (uint32_t b = a + 2; b < S; ++b) {
            const Acc &x = xt[static_cast<size_t>(a) * S + b];
            if (x.k == 0) {
                continue;
            }
            CrosstalkEntry c;
            c.s_a = a;
            c.s_b = b;
            c.rounds = x.k;
            c.p = x.p / x.k;
            c.sigma = x.sigma / x.k / std::sqrt(static_cast<double>(x.k));
            c.exceedance = c.sigma > 0 ? c.p / c.sigma : 0.0;
            r.crosstalk.push_back(c);
        }
    }
    return r;
}

}  // namespace repstab

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

#include "repstab/blossom.h"

#include <algorithm>
#include <cassert>

#include "repstab/errors.h"

// Follows the structure of the classic primal-dual formulation (Galil's
// survey, as popularized by Van Rantwijk's mwmatching). Endpoints: edge k has
// endpoints 2k (u) and 2k+1 (v); mate[] holds the remote endpoint.

namespace repstab {

namespace {

class Matcher {
   public:
    Matcher(int32_t n, const std::vector<WeightedEdge> &edges, bool maxcard)
        : n_(n), edges_(edges), maxcard_(maxcard) {}

    std::vector<int32_t> solve();

   private:
    using Vec = std::vector<int32_t>;

    int64_t slack(int32_t k) const { return dual_[edges_[k].u] + dual_[edges_[k].v] - 2 * edges_[k].w; }
    int32_t endpoint(int32_t p) const { return p & 1 ? edges_[p >> 1].v : edges_[p >> 1].u; }
    static int32_t wrap(int32_t j, size_t len) {
        int32_t L = static_cast<int32_t>(len);
        return ((j % L) + L) % L;
    }

    void leaves(int32_t b, Vec &out) const {
        if (b < n_) {
            out.push_back(b);
            return;
        }
        for (int32_t c : childs_[b]) {
            leaves(c, out);
        }
    }
    Vec leaves(int32_t b) const {
        Vec out;
        leaves(b, out);
        return out;
    }

    void assign_label(int32_t w, int32_t t, int32_t p);
    int32_t scan_blossom(int32_t v, int32_t w);
    void add_blossom(int32_t base, int32_t k);
    void expand_blossom(int32_t b, bool endstage);
    void augment_blossom(int32_t b, int32_t v);
    void augment_matching(int32_t k);

    int32_t n_;
    const std::vector<WeightedEdge> &edges_;
    bool maxcard_;

    std::vector<Vec> neighbend_;
    Vec mate_, label_, labelend_, inblossom_, parent_, base_, bestedge_, unused_, queue_;
    std::vector<Vec> childs_, endps_, bestedges_;
    std::vector<char> has_bestedges_, allowedge_;
    std::vector<int64_t> dual_;
};

void Matcher::assign_label(int32_t w, int32_t t, int32_t p) {
    int32_t b = inblossom_[w];
    assert(label_[w] == 0 && label_[b] == 0);
    label_[w] = label_[b] = t;
    labelend_[w] = labelend_[b] = p;
    bestedge_[w] = bestedge_[b] = -1;
    if (t == 1) {
        leaves(b, queue_);
    } else if (t == 2) {
        int32_t base = base_[b];
        assert(mate_[base] >= 0);
        assign_label(endpoint(mate_[base]), 1, mate_[base] ^ 1);
    }
}

int32_t Matcher::scan_blossom(int32_t v, int32_t w) {
    Vec path;
    int32_t base = -1;
    while (v != -1 || w != -1) {
        int32_t b = inblossom_[v];
        if (label_[b] & 4) {
            base = base_[b];
            break;
        }
        assert(label_[b] == 1);
        path.push_back(b);
        label_[b] = 5;
        if (labelend_[b] == -1) {
            v = -1;
        } else {
            v = endpoint(labelend_[b]);
            b = inblossom_[v];
            assert(label_[b] == 2);
            v = endpoint(labelend_[b]);
        }
        if (w != -1) {
            std::swap(v, w);
        }
    }
    for (int32_t b : path) {
        label_[b] = 1;
    }
    return base;
}

void Matcher::add_blossom(int32_t base, int32_t k) {
    int32_t v = edges_[k].u, w = edges_[k].v;
    int32_t bb = inblossom_[base], bv = inblossom_[v], bw = inblossom_[w];
    int32_t b = unused_.back();
    unused_.pop_back();
    base_[b] = base;
    parent_[b] = -1;
    parent_[bb] = b;
    Vec path, endps;
    while (bv != bb) {
        parent_[bv] = b;
        path.push_back(bv);
        endps.push_back(labelend_[bv]);
        v = endpoint(labelend_[bv]);
        bv = inblossom_[v];
    }
    path.push_back(bb);
    std::reverse(path.begin(), path.end());
    std::reverse(endps.begin(), endps.end());
    endps.push_back(2 * k);
    while (bw != bb) {
        parent_[bw] = b;
        path.push_back(bw);
        endps.push_back(labelend_[bw] ^ 1);
        w = endpoint(labelend_[bw]);
        bw = inblossom_[w];
    }
    assert(label_[bb] == 1);
    childs_[b] = path;
    endps_[b] = std::move(endps);
    label_[b] = 1;
    labelend_[b] = labelend_[bb];
    dual_[b] = 0;
    for (int32_t leaf : leaves(b)) {
        if (label_[inblossom_[leaf]] == 2) {
            queue_.push_back(leaf);
        }
        inblossom_[leaf] = b;
    }
    Vec bestedgeto(2 * n_, -1);
    for (int32_t sub : path) {
        auto consider = [&](int32_t kk) {
            int32_t i = edges_[kk].u, j = edges_[kk].v;
            if (inblossom_[j] == b) {
                std::swap(i, j);
            }
            int32_t bj = inblossom_[j];
            if (bj != b && label_[bj] == 1 && (bestedgeto[bj] == -1 || slack(kk) < slack(bestedgeto[bj]))) {
                bestedgeto[bj] = kk;
            }
        };
        if (!has_bestedges_[sub]) {
            for (int32_t leaf : leaves(sub)) {
                for (int32_t p : neighbend_[leaf]) {
                    consider(p >> 1);
                }
            }
        } else {
            for (int32_t kk : bestedges_[sub]) {
                consider(kk);
            }
        }
        bestedges_[sub].clear();
        has_bestedges_[sub] = 0;
        bestedge_[sub] = -1;
    }
    bestedges_[b].clear();
    for (int32_t kk : bestedgeto) {
        if (kk != -1) {
            bestedges_[b].push_back(kk);
        }
    }
    has_bestedges_[b] = 1;
    bestedge_[b] = -1;
    for (int32_t kk : bestedges_[b]) {
        if (bestedge_[b] == -1 || slack(kk) < slack(bestedge_[b])) {
            bestedge_[b] = kk;
        }
    }
}

void Matcher::expand_blossom(int32_t b, bool endstage) {
    // Copy: recursive expansion recycles child slots.
    Vec children = childs_[b];
    for (int32_t s : children) {
        parent_[s] = -1;
        if (s < n_) {
            inblossom_[s] = s;
        } else if (endstage && dual_[s] == 0) {
            expand_blossom(s, endstage);
        } else {
            for (int32_t leaf : leaves(s)) {
                inblossom_[leaf] = s;
            }
        }
    }
    if (!endstage && label_[b] == 2) {
        const Vec &ch = childs_[b];
        const Vec &ep = endps_[b];
        const size_t L = ch.size();
        int32_t entrychild = inblossom_[endpoint(labelend_[b] ^ 1)];
        int32_t j = static_cast<int32_t>(std::find(ch.begin(), ch.end(), entrychild) - ch.begin());
        int32_t jstep, endptrick;
        if (j & 1) {
            j -= static_cast<int32_t>(L);
            jstep = 1;
            endptrick = 0;
        } else {
            jstep = -1;
            endptrick = 1;
        }
        int32_t p = labelend_[b];
        while (j != 0) {
            label_[endpoint(p ^ 1)] = 0;
            label_[endpoint(ep[wrap(j - endptrick, L)] ^ endptrick ^ 1)] = 0;
            assign_label(endpoint(p ^ 1), 2, p);
            allowedge_[ep[wrap(j - endptrick, L)] >> 1] = 1;
            j += jstep;
            p = ep[wrap(j - endptrick, L)] ^ endptrick;
            allowedge_[p >> 1] = 1;
            j += jstep;
        }
        int32_t bv = ch[wrap(j, L)];
        label_[endpoint(p ^ 1)] = label_[bv] = 2;
        labelend_[endpoint(p ^ 1)] = labelend_[bv] = p;
        bestedge_[bv] = -1;
        j += jstep;
        while (ch[wrap(j, L)] != entrychild) {
            bv = ch[wrap(j, L)];
            if (label_[bv] == 1) {
                j += jstep;
                continue;
            }
            int32_t found = -1;
            for (int32_t leaf : leaves(bv)) {
                if (label_[leaf] != 0) {
                    found = leaf;
                    break;
                }
            }
            if (found != -1) {
                assert(label_[found] == 2);
                assert(inblossom_[found] == bv);
                label_[found] = 0;
                label_[endpoint(mate_[base_[bv]])] = 0;
                assign_label(found, 2, labelend_[found]);
            }
            j += jstep;
        }
    }
    label_[b] = labelend_[b] = -1;
    childs_[b].clear();
    endps_[b].clear();
    base_[b] = -1;
    bestedges_[b].clear();
    has_bestedges_[b] = 0;
    bestedge_[b] = -1;
    unused_.push_back(b);
}

void Matcher::augment_blossom(int32_t b, int32_t v) {
    int32_t t = v;
    while (parent_[t] != b) {
        t = parent_[t];
    }
    if (t >= n_) {
        augment_blossom(t, v);
    }
    Vec &ch = childs_[b];
    Vec &ep = endps_[b];
    const size_t L = ch.size();
    int32_t i = static_cast<int32_t>(std::find(ch.begin(), ch.end(), t) - ch.begin());
    int32_t j = i;
    int32_t jstep, endptrick;
    if (i & 1) {
        j -= static_cast<int32_t>(L);
        jstep = 1;
        endptrick = 0;
    } else {
        jstep = -1;
        endptrick = 1;
    }
    while (j != 0) {
        j += jstep;
        t = ch[wrap(j, L)];
        int32_t p = ep[wrap(j - endptrick, L)] ^ endptrick;
        if (t >= n_) {
            augment_blossom(t, endpoint(p));
        }
        j += jstep;
        t = ch[wrap(j, L)];
        if (t >= n_) {
            augment_blossom(t, endpoint(p ^ 1));
        }
        mate_[endpoint(p)] = p ^ 1;
        mate_[endpoint(p ^ 1)] = p;
    }
    std::rotate(ch.begin(), ch.begin() + i, ch.end());
    std::rotate(ep.begin(), ep.begin() + i, ep.end());
    base_[b] = base_[ch[0]];
    assert(base_[b] == v);
}

void Matcher::augment_matching(int32_t k) {
    int32_t v = edges_[k].u, w = edges_[k].v;
    for (auto [s, p] : {std::pair{v, 2 * k + 1}, std::pair{w, 2 * k}}) {
        while (true) {
            int32_t bs = inblossom_[s];
            assert(label_[bs] == 1);
            if (bs >= n_) {
                augment_blossom(bs, s);
            }
            mate_[s] = p;
            if (labelend_[bs] == -1) {
                break;
            }
            int32_t t = endpoint(labelend_[bs]);
            int32_t bt = inblossom_[t];
            assert(label_[bt] == 2);
            s = endpoint(labelend_[bt]);
            int32_t j = endpoint(labelend_[bt] ^ 1);
            if (bt >= n_) {
                augment_blossom(bt, j);
            }
            mate_[j] = labelend_[bt];
            p = labelend_[bt] ^ 1;
        }
    }
}

std::vector<int32_t> Matcher::solve() {
    const int32_t n = n_;
    const int32_t m = static_cast<int32_t>(edges_.size());
    if (n == 0) {
        return {};
    }
    int64_t maxweight = 0;
    neighbend_.assign(n, {});
    for (int32_t k = 0; k < m; ++k) {
        const auto &e = edges_[k];
        if (e.u < 0 || e.v < 0 || e.u >= n || e.v >= n || e.u == e.v) {
            throw ValidationError("matching edge has invalid endpoints");
        }
        maxweight = std::max(maxweight, e.w);
        neighbend_[e.u].push_back(2 * k + 1);
        neighbend_[e.v].push_back(2 * k);
    }
    mate_.assign(n, -1);
    label_.assign(2 * n, 0);
    labelend_.assign(2 * n, -1);
    inblossom_.resize(n);
    for (int32_t v = 0; v < n; ++v) {
        inblossom_[v] = v;
    }
    parent_.assign(2 * n, -1);
    childs_.assign(2 * n, {});
    endps_.assign(2 * n, {});
    base_.assign(2 * n, -1);
    for (int32_t v = 0; v < n; ++v) {
        base_[v] = v;
    }
    bestedge_.assign(2 * n, -1);
    bestedges_.assign(2 * n, {});
    has_bestedges_.assign(2 * n, 0);
    unused_.clear();
    for (int32_t b = 2 * n - 1; b >= n; --b) {
        unused_.push_back(b);
    }
    dual_.assign(2 * n, 0);
    for (int32_t v = 0; v < n; ++v) {
        dual_[v] = maxweight;
    }
    allowedge_.assign(m, 0);

    for (int32_t stage = 0; stage < n; ++stage) {
        std::fill(label_.begin(), label_.end(), 0);
        std::fill(bestedge_.begin(), bestedge_.end(), -1);
        for (int32_t b = n; b < 2 * n; ++b) {
            bestedges_[b].clear();
            has_bestedges_[b] = 0;
        }
        std::fill(allowedge_.begin(), allowedge_.end(), 0);
        queue_.clear();
        for (int32_t v = 0; v < n; ++v) {
            if (mate_[v] == -1 && label_[inblossom_[v]] == 0) {
                assign_label(v, 1, -1);
            }
        }
        bool augmented = false;
        while (true) {
            while (!queue_.empty() && !augmented) {
                int32_t v = queue_.back();
                queue_.pop_back();
                assert(label_[inblossom_[v]] == 1);
                for (int32_t p : neighbend_[v]) {
                    int32_t k = p >> 1;
                    int32_t w = endpoint(p);
                    if (inblossom_[v] == inblossom_[w]) {
                        continue;
                    }
                    int64_t kslack = 0;
                    if (!allowedge_[k]) {
                        kslack = slack(k);
                        if (kslack <= 0) {
                            allowedge_[k] = 1;
                        }
                    }
                    if (allowedge_[k]) {
                        if (label_[inblossom_[w]] == 0) {
                            assign_label(w, 2, p ^ 1);
                        } else if (label_[inblossom_[w]] == 1) {
                            int32_t base = scan_blossom(v, w);
                            if (base >= 0) {
                                add_blossom(base, k);
                            } else {
                                augment_matching(k);
                                augmented = true;
                                break;
                            }
                        } else if (label_[w] == 0) {
                            label_[w] = 2;
                            labelend_[w] = p ^ 1;
                        }
                    } else if (label_[inblossom_[w]] == 1) {
                        int32_t b = inblossom_[v];
                        if (bestedge_[b] == -1 || kslack < slack(bestedge_[b])) {
                            bestedge_[b] = k;
                        }
                    } else if (label_[w] == 0) {
                        if (bestedge_[w] == -1 || kslack < slack(bestedge_[w])) {
                            bestedge_[w] = k;
                        }
                    }
                }
            }
            if (augmented) {
                break;
            }
            int deltatype = -1;
            int64_t delta = 0;
            int32_t deltaedge = -1, deltablossom = -1;
            if (!maxcard_) {
                deltatype = 1;
                delta = *std::min_element(dual_.begin(), dual_.begin() + n);
            }
            for (int32_t v = 0; v < n; ++v) {
                if (label_[inblossom_[v]] == 0 && bestedge_[v] != -1) {
                    int64_t d = slack(bestedge_[v]);
                    if (deltatype == -1 || d < delta) {
                        delta = d;
                        deltatype = 2;
                        deltaedge = bestedge_[v];
                    }
                }
            }
            for (int32_t b = 0; b < 2 * n; ++b) {
                if (parent_[b] == -1 && label_[b] == 1 && bestedge_[b] != -1) {
                    int64_t kslack = slack(bestedge_[b]);
                    assert(kslack % 2 == 0);
                    int64_t d = kslack / 2;
                    if (deltatype == -1 || d < delta) {
                        delta = d;
                        deltatype = 3;
                        deltaedge = bestedge_[b];
                    }
                }
            }
            for (int32_t b = n; b < 2 * n; ++b) {
                if (base_[b] >= 0 && parent_[b] == -1 && label_[b] == 2 && (deltatype == -1 || dual_[b] < delta)) {
                    delta = dual_[b];
                    deltatype = 4;
                    deltablossom = b;
                }
            }
            if (deltatype == -1) {
                deltatype = 1;
                delta = std::max<int64_t>(0, *std::min_element(dual_.begin(), dual_.begin() + n));
            }
            for (int32_t v = 0; v < n; ++v) {
                int32_t l = label_[inblossom_[v]];
                if (l == 1) {
                    dual_[v] -= delta;
                } else if (l == 2) {
                    dual_[v] += delta;
                }
            }
            for (int32_t b = n; b < 2 * n; ++b) {
                if (base_[b] >= 0 && parent_[b] == -1) {
                    if (label_[b] == 1) {
                        dual_[b] += delta;
                    } else if (label_[b] == 2) {
                        dual_[b] -= delta;
                    }
                }
            }
            if (deltatype == 1) {
                break;
            } else if (deltatype == 2) {
                allowedge_[deltaedge] = 1;
                int32_t i = edges_[deltaedge].u, j = edges_[deltaedge].v;
                if (label_[inblossom_[i]] == 0) {
                    std::swap(i, j);
                }
                queue_.push_back(i);
            } else if (deltatype == 3) {
                allowedge_[deltaedge] = 1;
                queue_.push_back(edges_[deltaedge].u);
            } else {
                expand_blossom(deltablossom, false);
            }
        }
        if (!augmented) {
            break;
        }
        for (int32_t b = n; b < 2 * n; ++b) {
            if (parent_[b] == -1 && base_[b] >= 0 && label_[b] == 1 && dual_[b] == 0) {
                expand_blossom(b, true);
            }
        }
    }
    std::vector<int32_t> out(n, -1);
    for (int32_t v = 0; v < n; ++v) {
        if (mate_[v] >= 0) {
            out[v] = endpoint(mate_[v]);
        }
    }
    return out;
}

}  // namespace

std::vector<int32_t> max_weight_matching(int32_t n_vertices, const std::vector<WeightedEdge> &edges,
                                         bool max_cardinality) {
    Matcher m(n_vertices, edges, max_cardinality);
    return m.solve();
}

std::vector<int32_t> min_weight_perfect_matching(int32_t n_vertices, const std::vector<WeightedEdge> &edges) {
    int64_t top = 0;
    for (const auto &e : edges) {
        top = std::max(top, e.w);
    }
    std::vector<WeightedEdge> flipped(edges);
    for (auto &e : flipped) {
        e.w = top + 1 - e.w;
    }
    auto mate = max_weight_matching(n_vertices, flipped, true);
    for (int32_t v : mate) {
        if (v < 0) {
            throw NumericError("graph has no perfect matching");
        }
    }
    return mate;
}

}  // namespace repstab

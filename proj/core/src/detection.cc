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

#include "repstab/detection.h"

#include <algorithm>
#include <bit>
#include <fstream>

#include "repstab/errors.h"

namespace repstab {

namespace {

bool parity(uint64_t w) { return std::popcount(w) & 1; }

uint64_t lane_mask(size_t n) { return n >= 64 ? ~uint64_t{0} : (uint64_t{1} << n) - 1; }

double quantile(std::vector<double> sorted, double q) {
    std::sort(sorted.begin(), sorted.end());
    double pos = q * static_cast<double>(sorted.size() - 1);
    size_t lo = static_cast<size_t>(pos);
    size_t hi = std::min(lo + 1, sorted.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1 - frac) + sorted[hi] * frac;
}

size_t unmasked_nodes(const CodeLayout &l) {
    size_t n = 0;
    for (uint32_t i = 0; i < l.n_nodes(); ++i) {
        n += !l.masked(i);
    }
    return n;
}

}  // namespace

DetectionSet extract_detections(const std::vector<ShotRecord> &shots, const CodeSpec &spec, uint64_t seed) {
    DetectionSet out;
    out.layout = layout_of(spec);
    const CodeLayout &l = out.layout;
    const RecordShape shape = shape_of(spec);
    out.shots.reserve(shots.size());
    for (const ShotRecord &r : shots) {
        if (r.stabilizer_bits.size() != shape.n_measure * shape.n_rounds ||
            r.final_data_bits.size() != shape.n_data) {
            throw ValidationError("shot " + std::to_string(r.shot) + " does not match the code dimensions");
        }
        auto init = init_for_shot(spec, seed, r.shot);
        uint64_t init_bits = 0, final_bits = 0;
        for (uint32_t k = 0; k < l.n_data; ++k) {
            init_bits |= uint64_t{init[k]} << k;
            final_bits |= uint64_t{r.final_data_bits[k]} << k;
        }
        DetectionTensor t;
        t.shot = r.shot;
        t.burst_flag = r.burst_flag;
        auto m = [&](uint32_t s, uint32_t round) { return r.stabilizer_bits[round * l.n_measure + s] != 0; };
        for (uint32_t round = 0; round <= l.rounds; ++round) {
            for (uint32_t s = 0; s < l.n_measure; ++s) {
                uint32_t node = l.node(s, round);
                if (l.masked(node)) {
                    continue;
                }
                bool now = round < l.rounds ? m(s, round) : parity(final_bits & l.support_mask(s));
                bool before = round > 0 ? m(s, round - 1) : parity(init_bits & l.support_mask(s));
                if (now != before) {
                    t.events.push_back(node);
                }
            }
        }
        t.final_flips = final_bits ^ init_bits ^ l.pulse_flips;
        t.observable = parity(t.final_flips & l.logical_mask());
        out.shots.push_back(std::move(t));
    }
    return out;
}

void append_detections(const SampleBlock &block, const CodeLayout &l, std::vector<DetectionTensor> &out) {
    const uint32_t nm = l.n_measure, R = l.rounds;
    if (block.flips.size() != size_t{nm} * R + l.n_data) {
        throw ValidationError("sample block does not match the code layout");
    }
    const uint64_t lanes = lane_mask(block.n_shots);
    const uint64_t *f = block.flips.data();
    const uint64_t *fin = f + size_t{nm} * R;
    size_t base = out.size();
    out.resize(base + block.n_shots);
    for (size_t lane = 0; lane < block.n_shots; ++lane) {
        out[base + lane].shot = block.first_shot + lane;
        out[base + lane].burst_flag = block.burst >> lane & 1;
    }
    for (uint32_t t = 0; t <= R; ++t) {
        for (uint32_t s = 0; s < nm; ++s) {
            uint32_t node = l.node(s, t);
            if (l.masked(node)) {
                continue;
            }
            uint64_t w;
            if (t < R) {
                w = f[t * nm + s];
            } else {
                w = 0;
                for (uint32_t k : l.supports[s]) {
                    w ^= fin[k];
                }
            }
            if (t > 0) {
                w ^= f[(t - 1) * nm + s];
            }
            for (w &= lanes; w; w &= w - 1) {
                out[base + std::countr_zero(w)].events.push_back(node);
            }
        }
    }
    for (uint32_t k = 0; k < l.n_data; ++k) {
        for (uint64_t w = fin[k] & lanes; w; w &= w - 1) {
            out[base + std::countr_zero(w)].final_flips |= uint64_t{1} << k;
        }
    }
    const uint64_t logical = l.logical_mask();
    for (size_t lane = 0; lane < block.n_shots; ++lane) {
        out[base + lane].observable = parity(out[base + lane].final_flips & logical);
    }
}

namespace {

FrameSimulator make_simulator(const CodeSpec &spec, const NoiseModel &noise, uint64_t seed) {
    Circuit c = build_circuit(spec, std::vector<uint8_t>(spec.data_count(), 0));
    auto joint = compile_channels(spec, c, noise);
    return FrameSimulator(c, noise, seed, std::move(joint));
}

}  // namespace

DetectionSampler::DetectionSampler(const CodeSpec &spec, const NoiseModel &noise, uint64_t seed)
    : layout_(layout_of(spec)), sim_(make_simulator(spec, noise, seed)) {}

void DetectionSampler::sample(uint64_t first, uint64_t n, std::vector<DetectionTensor> &out) {
    out.reserve(out.size() + n);
    for (uint64_t done = 0; done < n; done += 64) {
        sim_.sample(first + done, static_cast<size_t>(std::min<uint64_t>(64, n - done)), block_);
        append_detections(block_, layout_, out);
    }
}

DetectionSet DetectionSampler::sample_set(uint64_t n, uint64_t first) {
    DetectionSet set;
    set.layout = layout_;
    sample(first, n, set.shots);
    return set;
}

double DefReport::bulk() const {
    if (per_round.size() < 3) {
        double s = 0;
        for (double v : per_round) {
            s += v;
        }
        return per_round.empty() ? 0.0 : s / static_cast<double>(per_round.size());
    }
    double s = 0;
    for (size_t t = 1; t + 1 < per_round.size(); ++t) {
        s += per_round[t];
    }
    return s / static_cast<double>(per_round.size() - 2);
}

DefReport def_report(const DetectionSet &set) {
    const CodeLayout &l = set.layout;
    DefReport r;
    r.per_node.assign(l.n_nodes(), 0.0);
    r.per_shot.reserve(set.shots.size());
    const double unmasked = static_cast<double>(unmasked_nodes(l));
    std::vector<uint64_t> counts(l.n_nodes(), 0);
    for (const auto &t : set.shots) {
        for (uint32_t node : t.events) {
            counts[node]++;
        }
        r.per_shot.push_back(unmasked > 0 ? static_cast<double>(t.events.size()) / unmasked : 0.0);
    }
    const double n = std::max<double>(1.0, static_cast<double>(set.shots.size()));
    for (uint32_t i = 0; i < l.n_nodes(); ++i) {
        r.per_node[i] = static_cast<double>(counts[i]) / n;
    }
    r.per_round.assign(l.rounds + 1, 0.0);
    r.per_measure.assign(l.n_measure, 0.0);
    std::vector<int> round_n(l.rounds + 1, 0), meas_n(l.n_measure, 0);
    for (uint32_t i = 0; i < l.n_nodes(); ++i) {
        if (l.masked(i)) {
            continue;
        }
        r.per_round[l.node_t(i)] += r.per_node[i];
        round_n[l.node_t(i)]++;
        r.per_measure[l.node_s(i)] += r.per_node[i];
        meas_n[l.node_s(i)]++;
    }
    for (size_t t = 0; t < r.per_round.size(); ++t) {
        r.per_round[t] = round_n[t] ? r.per_round[t] / round_n[t] : 0.0;
    }
    for (size_t s = 0; s < r.per_measure.size(); ++s) {
        r.per_measure[s] = meas_n[s] ? r.per_measure[s] / meas_n[s] : 0.0;
    }
    return r;
}

BurstFilterResult burst_filter(const DetectionSet &set, double k_sigma, uint32_t cooldown) {
    if (set.shots.size() < 100) {
        throw ValidationError("burst filter needs at least 100 shots");
    }
    for (size_t j = 1; j < set.shots.size(); ++j) {
        if (set.shots[j].shot <= set.shots[j - 1].shot) {
            throw ValidationError("burst filter needs shots in acquisition order");
        }
    }
    DefReport rep = def_report(set);
    const auto &v = rep.per_shot;
    double med = quantile(v, 0.5);
    double iqr = quantile(v, 0.75) - quantile(v, 0.25);
    // One event is the resolution of a per-shot fraction; it keeps the
    // threshold meaningful when the quartiles coincide.
    double resolution = 1.0 / static_cast<double>(std::max<size_t>(1, unmasked_nodes(set.layout)));
    double sigma = std::max(iqr / 1.349, resolution);
    BurstFilterResult out;
    out.threshold = med + k_sigma * sigma;
    out.kept.layout = set.layout;
    std::vector<uint8_t> remove(v.size(), 0);
    for (size_t j = 0; j < v.size();) {
        if (v[j] <= out.threshold) {
            ++j;
            continue;
        }
        size_t start = j;
        size_t quiet = 0;
        size_t k = j + 1;
        for (; k < v.size() && quiet < cooldown; ++k) {
            quiet = v[k] > out.threshold ? 0 : quiet + 1;
        }
        for (size_t i = start; i < k; ++i) {
            remove[i] = 1;
        }
        out.removed.emplace_back(set.shots[start].shot, set.shots[k - 1].shot);
        j = k;
    }
    for (size_t j = 0; j < v.size(); ++j) {
        if (remove[j]) {
            out.removed_count++;
        } else {
            out.kept.shots.push_back(set.shots[j]);
        }
    }
    return out;
}

std::vector<ErrorMechanism> error_mechanisms(const CodeSpec &spec, const NoiseModel &noise) {
    Circuit c = build_circuit(spec, std::vector<uint8_t>(spec.data_count(), 0));
    CodeLayout l = layout_of(spec);
    FrameInjector probe(c);
    auto singles = enumerate_single_errors(c);
    const auto &locs = probe.locations();
    std::vector<ErrorMechanism> out;
    SampleBlock block;
    std::vector<DetectionTensor> tensors;
    for (size_t base = 0; base < singles.size(); base += 64) {
        size_t n = std::min<size_t>(64, singles.size() - base);
        block.first_shot = 0;
        block.n_shots = n;
        block.burst = 0;
        block.flips.assign(c.measurement_count(), 0);
        for (size_t lane = 0; lane < n; ++lane) {
            for (uint32_t m : singles[base + lane].flipped) {
                block.flips[m] |= uint64_t{1} << lane;
            }
        }
        tensors.clear();
        append_detections(block, l, tensors);
        for (size_t lane = 0; lane < n; ++lane) {
            const SingleError &e = singles[base + lane];
            DetectionTensor &t = tensors[lane];
            if (t.events.empty() && t.final_flips == 0) {
                continue;
            }
            const NoiseLocation &loc = locs[e.location];
            out.push_back({e.location, e.pauli, loc.component, single_error_probability(loc, noise),
                           std::move(t.events), t.final_flips, t.observable});
        }
    }
    return out;
}

void write_detection_archive(const std::string &path, const DetectionSet &set) {
    const CodeLayout &l = set.layout;
    ArchiveHeader h;
    h.n_shots = static_cast<uint32_t>(set.shots.size());
    h.shape = {l.n_measure, l.rounds, l.n_data};
    h.flags = kFlagDetections;
    auto bytes = detail::encode_header(h);
    const uint32_t nn = l.n_nodes();
    const uint32_t bits = 2 * nn + l.n_data + 1;
    const size_t stride = (bits + 7) / 8;
    for (const auto &t : set.shots) {
        size_t base = bytes.size();
        bytes.resize(base + stride, 0);
        auto set_bit = [&](uint32_t b) { bytes[base + b / 8] |= static_cast<uint8_t>(1u << (b % 8)); };
        for (uint32_t node : t.events) {
            if (node >= nn) {
                throw ValidationError("detection event outside the node grid");
            }
            set_bit(node);
        }
        for (uint32_t i = 0; i < nn; ++i) {
            if (l.masked(i)) {
                set_bit(nn + i);
            }
        }
        for (uint32_t k = 0; k < l.n_data; ++k) {
            if (t.final_flips >> k & 1) {
                set_bit(2 * nn + k);
            }
        }
        if (t.burst_flag) {
            set_bit(2 * nn + l.n_data);
        }
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw IoError("cannot open " + path + " for writing");
    }
    f.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) {
        throw IoError("write failed for " + path);
    }
}

DetectionSet read_detection_archive(const std::string &path, const CodeSpec &spec) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw IoError("cannot open " + path);
    }
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), {});
    ArchiveHeader h = detail::decode_header(bytes.data(), bytes.size());
    if (!(h.flags & kFlagDetections)) {
        throw IoError(path + " holds shot records, not detection events");
    }
    DetectionSet set;
    set.layout = layout_of(spec);
    const CodeLayout &l = set.layout;
    if (h.shape.n_measure != l.n_measure || h.shape.n_rounds != l.rounds || h.shape.n_data != l.n_data) {
        throw ValidationError(path + " does not match the code dimensions");
    }
    const uint32_t nn = l.n_nodes();
    const size_t stride = (2 * nn + l.n_data + 1 + 7) / 8;
    if (bytes.size() != 18 + stride * h.n_shots) {
        throw IoError(path + " is truncated or has trailing bytes");
    }
    set.shots.resize(h.n_shots);
    for (uint32_t j = 0; j < h.n_shots; ++j) {
        const uint8_t *p = bytes.data() + 18 + stride * j;
        auto get = [&](uint32_t b) { return (p[b / 8] >> (b % 8) & 1) != 0; };
        DetectionTensor &t = set.shots[j];
        t.shot = j;
        for (uint32_t i = 0; i < nn; ++i) {
            if (get(nn + i) != l.masked(i)) {
                throw ValidationError(path + " has a node mask that does not match the code");
            }
            if (get(i)) {
                t.events.push_back(i);
            }
        }
        for (uint32_t k = 0; k < l.n_data; ++k) {
            if (get(2 * nn + k)) {
                t.final_flips |= uint64_t{1} << k;
            }
        }
        t.observable = parity(t.final_flips & l.logical_mask());
        t.burst_flag = get(2 * nn + l.n_data);
    }
    return set;
}

DetectionTensor subsample(const DetectionTensor &t, const CodeLayout &parent, const CodeLayout &child,
                          const SubsampleMap &map) {
    if (parent.family == CodeFamily::Surface2 || parent.distance != map.parent_d || child.distance != map.child_d ||
        parent.rounds != child.rounds) {
        throw ValidationError("subsample map does not fit the layouts");
    }
    DetectionTensor out;
    out.shot = t.shot;
    out.burst_flag = t.burst_flag;
    for (uint32_t node : t.events) {
        uint32_t s = parent.node_s(node);
        if (s >= map.offset && s < map.offset + child.n_measure) {
            out.events.push_back(child.node(s - map.offset, parent.node_t(node)));
        }
    }
    std::sort(out.events.begin(), out.events.end());
    out.final_flips = (t.final_flips >> map.offset) & ((uint64_t{1} << child.n_data) - 1);
    out.observable = parity(out.final_flips & child.logical_mask());
    return out;
}

}  // namespace repstab

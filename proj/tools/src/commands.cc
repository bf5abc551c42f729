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

#include "commands.h"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "repstab/analysis.h"
#include "repstab/correlation.h"
#include "repstab/decoder.h"
#include "repstab/detection.h"
#include "repstab/errors.h"
#include "repstab/records.h"

namespace repstab::cli {

namespace fs = std::filesystem;

CodeSpec CodeOptions::resolve() const {
    Json j = {{"family", family}, {"distance", distance}, {"rounds", rounds},
              {"basis", basis},   {"init", init},         {"init_batch", init_batch}};
    if (family == "surface2") {
        j["distance"] = 2;
    }
    return code_from_json(j);
}

NoiseModel NoiseOptions::resolve(CodeFamily family) const {
    if (!file.empty()) {
        return noise_from_json(read_json_file(file));
    }
    if (!inline_json.is_null()) {
        return noise_from_json(inline_json);
    }
    return noise_preset(preset.empty() ? default_preset(family) : preset);
}

ArchiveInput parse_archive_input(const std::string &text) {
    // path:distance:rounds, split from the right so paths may contain ':'
    auto last = text.rfind(':');
    auto mid = last == std::string::npos || last == 0 ? std::string::npos : text.rfind(':', last - 1);
    if (last == std::string::npos || mid == std::string::npos) {
        throw ValidationError("archive input must look like path:distance:rounds");
    }
    ArchiveInput a;
    a.path = text.substr(0, mid);
    try {
        a.distance = static_cast<uint32_t>(std::stoul(text.substr(mid + 1, last - mid - 1)));
        a.rounds = static_cast<uint32_t>(std::stoul(text.substr(last + 1)));
    } catch (const std::exception &) {
        throw ValidationError("bad distance or rounds in archive input '" + text + "'");
    }
    return a;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string with_suffix(const std::string &given, const std::string &base, const std::string &suffix) {
    return given.empty() ? base + suffix : given;
}

NodeOrder parse_order(const std::string &s) {
    if (s == "time-first") return NodeOrder::TimeFirst;
    if (s == "space-first") return NodeOrder::SpaceFirst;
    throw ValidationError("order must be time-first or space-first");
}

Json def_json(const DefReport &r) {
    return {{"bulk", r.bulk()}, {"per_round", r.per_round}, {"per_measure", r.per_measure}};
}

Json ranges_json(const std::vector<std::pair<uint64_t, uint64_t>> &ranges) {
    Json arr = Json::array();
    for (auto [a, b] : ranges) {
        arr.push_back({a, b});
    }
    return arr;
}

Json edges_json(const EdgeReport &rep) {
    Json j;
    Json med;
    for (size_t c = 0; c < kNumEdgeClasses; ++c) {
        double m = rep.medians[c];
        med[edge_class_name(static_cast<EdgeClass>(c))] = std::isfinite(m) ? Json(m) : Json(nullptr);
    }
    j["medians"] = med;
    Json counts;
    for (size_t c = 0; c < kNumEdgeClasses; ++c) {
        counts[edge_class_name(static_cast<EdgeClass>(c))] = rep.classes[c].size();
    }
    j["counts"] = counts;
    Json xt = Json::array();
    for (const CrosstalkEntry &e : rep.crosstalk) {
        xt.push_back({{"s_a", e.s_a}, {"s_b", e.s_b}, {"p", e.p}, {"sigma", e.sigma}, {"exceedance", e.exceedance}});
    }
    j["crosstalk"] = xt;
    return j;
}

std::string logical_csv(const std::vector<std::tuple<uint32_t, uint32_t, LogicalRate>> &rows) {
    std::ostringstream ss;
    ss << std::setprecision(17);
    ss << "d,rounds,p_error,se,shots\n";
    for (const auto &[d, n, r] : rows) {
        ss << d << ',' << n << ',' << r.p << ',' << r.se << ',' << r.shots << '\n';
    }
    return ss.str();
}

struct LogicalRow {
    uint32_t d;
    uint32_t rounds;
    double p;
    double se;
    uint64_t shots;
};

std::vector<LogicalRow> parse_logical_csv(const std::string &text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.rfind("d,rounds,p_error", 0) != 0) {
        throw ValidationError("logical CSV must start with the header d,rounds,p_error,se,shots");
    }
    std::vector<LogicalRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        if (f.size() != 5) {
            throw ValidationError("logical CSV row needs 5 fields: " + line);
        }
        try {
            rows.push_back({static_cast<uint32_t>(std::stoul(f[0])), static_cast<uint32_t>(std::stoul(f[1])),
                            std::stod(f[2]), std::stod(f[3]), std::stoull(f[4])});
        } catch (const std::exception &) {
            throw ValidationError("malformed logical CSV row: " + line);
        }
    }
    if (rows.empty()) {
        throw ValidationError("logical CSV has no rows");
    }
    return rows;
}

/// Per-distance eps: the ansatz fit when three round counts exceed the
/// cutoff, otherwise the single-point inversion at the largest round count.
DistancePoint eps_for_distance(uint32_t d, const std::vector<LogicalRow> &rows, uint32_t min_rounds) {
    std::vector<RoundPoint> pts;
    const LogicalRow *longest = nullptr;
    size_t above = 0;
    for (const LogicalRow &r : rows) {
        if (r.d != d) continue;
        pts.push_back({r.rounds, r.p, r.shots});
        above += r.rounds > min_rounds;
        if (!longest || r.rounds > longest->rounds) longest = &r;
    }
    if (above >= 3) {
        EpsFit f = fit_eps_per_round(pts, min_rounds);
        return {d, f.eps, f.se};
    }
    double n = longest->rounds;
    double eps = eps_from_p(longest->p, longest->rounds);
    double slope = std::pow(1 - 2 * longest->p, 1.0 / n - 1.0) / n;
    return {d, eps, slope * longest->se};
}

FitResult fit_rows(const std::vector<LogicalRow> &rows, const std::vector<uint32_t> &exclude, uint32_t min_rounds) {
    std::vector<uint32_t> ds;
    for (const LogicalRow &r : rows) {
        if (std::find(ds.begin(), ds.end(), r.d) == ds.end()) ds.push_back(r.d);
    }
    std::sort(ds.begin(), ds.end());
    std::vector<DistancePoint> pts;
    for (uint32_t d : ds) {
        pts.push_back(eps_for_distance(d, rows, min_rounds));
    }
    FitResult f = fit_lambda(pts, exclude);
    f.min_rounds = min_rounds;
    return f;
}

}  // namespace

int cmd_simulate(const SimulateOptions &o, std::ostream &log) {
    CodeSpec spec = o.code.resolve();
    NoiseModel noise = o.noise.resolve(spec.family);
    if (o.shots == 0 || o.shots > UINT32_MAX) {
        throw ValidationError("shots must lie in [1, 2^32)");
    }
    uint64_t seed = resolve_seed(o.seed);
    Manifest m("simulate");
    m.set("code", code_to_json(spec));
    m.noise(noise);
    m.set("seed", seed);
    m.set("shots", o.shots);

    auto t0 = Clock::now();
    std::vector<ShotRecord> shots = sample_shots(spec, noise, o.shots, seed);
    m.stage("simulate", seconds_since(t0));
    t0 = Clock::now();
    write_shot_archive(o.out, shape_of(spec), shots);
    m.stage("write", seconds_since(t0));
    m.output(o.out);
    m.write(o.out + ".manifest.json");
    log << "simulate: " << shots.size() << " shots of " << family_name(spec.family) << " d=" << spec.distance
        << " rounds=" << spec.rounds << " -> " << o.out << "\n";
    return 0;
}

int cmd_detect(const DetectOptions &o, std::ostream &log) {
    CodeSpec spec = o.code.resolve();
    uint64_t seed = resolve_seed(o.seed);
    Manifest m("detect");
    m.set("code", code_to_json(spec));
    m.set("seed", seed);
    m.set("input", o.archive);
    m.set("input_sha256", sha256_file(o.archive));

    auto t0 = Clock::now();
    RecordShape shape;
    std::vector<ShotRecord> shots = read_shot_archive(o.archive, &shape);
    if (shape != shape_of(spec)) {
        throw ValidationError("archive shape does not match the code spec");
    }
    if (shots.empty()) {
        throw ValidationError("archive " + o.archive + " has no shots");
    }
    DetectionSet set = extract_detections(shots, spec, seed);
    m.stage("detect", seconds_since(t0));
    m.set("shots", shots.size());

    Json report;
    if (o.filter_bursts) {
        t0 = Clock::now();
        BurstFilterResult f = burst_filter(set, o.k_sigma, o.cooldown);
        report["bursts"] = {{"threshold", f.threshold},
                            {"removed_count", f.removed_count},
                            {"removed", ranges_json(f.removed)}};
        set = std::move(f.kept);
        m.stage("filter", seconds_since(t0));
        m.set("filter", {{"k_sigma", o.k_sigma}, {"cooldown", o.cooldown}});
    }
    report["def"] = def_json(def_report(set));
    report["kept_shots"] = set.shots.size();

    std::string def_path = with_suffix(o.def_out, o.out, ".def.json");
    write_detection_archive(o.out, set);
    write_text_file(def_path, report.dump(2) + "\n");
    m.output(o.out);
    m.output(def_path);
    m.write(o.out + ".manifest.json");
    log << "detect: bulk DEF " << report["def"]["bulk"].get<double>() << ", " << set.shots.size()
        << " shots kept -> " << o.out << "\n";
    return 0;
}

int cmd_correlate(const CorrelateOptions &o, std::ostream &log) {
    CodeSpec spec = o.code.resolve();
    NodeOrder order = parse_order(o.order);
    Manifest m("correlate");
    m.set("code", code_to_json(spec));
    m.set("input", o.detections);
    m.set("input_sha256", sha256_file(o.detections));
    m.set("order", o.order);
    m.set("approx", o.approx);

    auto t0 = Clock::now();
    DetectionSet set = read_detection_archive(o.detections, spec);
    CorrelationMatrix cm = o.approx ? pij_approx(set) : pij_exact(set);
    m.stage("correlate", seconds_since(t0));
    m.set("shots", set.shots.size());

    std::ostringstream csv;
    write_matrix_csv(csv, cm, order);
    Json edges = Json::object();
    if (spec.family != CodeFamily::Surface2) {
        edges = edges_json(classify_edges(cm, set.layout));
    }
    std::string edges_path = with_suffix(o.edges_out, o.out, ".edges.json");
    write_text_file(o.out, csv.str());
    write_text_file(edges_path, edges.dump(2) + "\n");
    m.output(o.out);
    m.output(edges_path);
    m.write(o.out + ".manifest.json");
    log << "correlate: " << cm.n_nodes << " nodes -> " << o.out << "\n";
    return 0;
}

int cmd_decode(const DecodeOptions &o, std::ostream &log) {
    CodeSpec spec = o.code.resolve();
    if (spec.family == CodeFamily::Surface2) {
        throw ValidationError("decoding needs a repetition code");
    }
    Weighting w = parse_weighting(o.weights);
    Manifest m("decode");
    m.set("code", code_to_json(spec));
    m.set("weights", o.weights);
    m.set("input", o.detections);
    m.set("input_sha256", sha256_file(o.detections));

    auto t0 = Clock::now();
    DetectionSet set = read_detection_archive(o.detections, spec);
    std::unique_ptr<MatchingGraph> graph;
    if (w == Weighting::Bootstrap || w == Weighting::Pij) {
        DetectionSet training = set;
        if (!o.train.empty()) {
            RecordShape shape;
            ArchiveHeader h = read_archive_header(o.train);
            shape = h.shape;
            if (shape.n_measure != spec.measure_count() || shape.n_data != spec.data_count()) {
                throw ValidationError("training archive is for a different code");
            }
            CodeSpec tspec = spec;
            tspec.rounds = shape.n_rounds - 1;
            training = read_detection_archive(o.train, tspec);
            m.set("train", o.train);
            m.set("train_sha256", sha256_file(o.train));
        }
        MatchingGraph trained = w == Weighting::Pij ? weights_pij(training) : weights_bootstrap(training);
        graph = std::make_unique<MatchingGraph>(trained.retarget(set.layout));
    } else if (w == Weighting::FirstPrinciples) {
        NoiseModel noise = o.noise.resolve(spec.family);
        m.noise(noise);
        graph = std::make_unique<MatchingGraph>(weights_first_principles(spec, noise));
    } else {
        graph = std::make_unique<MatchingGraph>(weights_uniform(set.layout));
    }
    m.stage("weights", seconds_since(t0));

    t0 = Clock::now();
    std::ostringstream csv;
    csv << std::setprecision(17) << "shot,logical_error,matched_weight,n_events\n";
    Decoder dec(*graph);
    uint64_t errors = 0;
    for (const DetectionTensor &t : set.shots) {
        DecodeResult r = dec.decode(t);
        errors += r.logical_error;
        csv << t.shot << ',' << (r.logical_error ? 1 : 0) << ',' << r.weight << ',' << t.events.size() << '\n';
    }
    m.stage("decode", seconds_since(t0));
    LogicalRate rate = binomial_rate(errors, set.shots.size());
    m.set("logical_error", {{"p", rate.p}, {"se", rate.se}, {"errors", rate.errors}, {"shots", rate.shots}});
    write_text_file(o.out, csv.str());
    m.output(o.out);
    m.write(o.out + ".manifest.json");
    log << "decode (" << o.weights << "): P_error " << rate.p << " +- " << rate.se << " over " << rate.shots
        << " shots -> " << o.out << "\n";
    return 0;
}

int cmd_fit(const FitOptions &o, std::ostream &log) {
    Manifest m("fit");
    m.set("input", o.input);
    m.set("input_sha256", sha256_file(o.input));
    m.set("exclude", o.exclude);
    m.set("min_rounds", o.min_rounds);
    auto t0 = Clock::now();
    FitResult f = fit_rows(parse_logical_csv(read_text_file(o.input)), o.exclude, o.min_rounds);
    m.stage("fit", seconds_since(t0));
    write_text_file(o.out, lambda_json(f).dump(2) + "\n");
    m.output(o.out);
    m.write(o.out + ".manifest.json");
    log << "fit: Lambda " << f.lambda << " +- " << f.lambda_err << ", C " << f.c << " +- " << f.c_err
        << (f.flagged ? " (Lambda <= 1)" : "") << " -> " << o.out << "\n";
    return 0;
}

int cmd_budget(const BudgetOptions &o, std::ostream &log) {
    SimulationBackend::Config cfg;
    cfg.family = parse_family(o.family);
    cfg.distances = o.distances;
    cfg.rounds = o.rounds;
    cfg.shots = o.shots;
    cfg.max_shots = o.max_shots;
    cfg.seed = resolve_seed(o.seed);
    cfg.workers = o.workers;
    NoiseModel noise = o.noise.resolve(cfg.family);
    Manifest m("budget");
    m.noise(noise);
    m.set("family", o.family);
    m.set("distances", o.distances);
    m.set("rounds", o.rounds);
    m.set("seed", cfg.seed);
    m.set("shots", {{"initial", o.shots}, {"max", o.max_shots}});

    auto t0 = Clock::now();
    SimulationBackend backend(cfg);
    ErrorBudget b = error_budget(noise, backend);
    m.stage("budget", seconds_since(t0));
    write_text_file(o.out, budget_json(b).dump(2) + "\n");
    m.output(o.out);
    m.write(o.out + ".manifest.json");
    log << std::fixed << std::setprecision(4);
    for (const BudgetComponent &c : b.components) {
        log << "  " << std::setw(3) << c.name << "  rate " << c.rate << "  weight " << c.weight << "  contribution "
            << c.contribution << "  " << std::setprecision(1) << c.pct << "%" << std::setprecision(4)
            << (c.converged ? "" : "  (shot cap)") << "\n";
    }
    log << "  total " << b.total << "  direct " << b.direct << "  stray " << b.stray << " -> " << o.out << "\n";
    return 0;
}

int cmd_project(const ProjectOptions &o, std::ostream &log) {
    Overhead ov = overhead_projection(o.lambda, o.target);
    Json j = {{"lambda", o.lambda}, {"target", o.target}, {"distance", ov.distance}, {"qubits", ov.qubits}};
    if (!o.out.empty()) {
        write_text_file(o.out, j.dump(2) + "\n");
    }
    log << j.dump() << "\n";
    return 0;
}

namespace {

struct Dataset {
    uint32_t d = 0;
    uint32_t rounds = 0;
    DetectionSet set;
    Json bursts;
};

/// Runs `f` and tags any failure with the stage name.
template <class F>
void run_stage(const char *name, Manifest &m, F &&f) {
    auto t0 = Clock::now();
    try {
        f();
    } catch (const ValidationError &e) {
        throw ValidationError(std::string("stage ") + name + ": " + e.what());
    } catch (const NumericError &e) {
        throw NumericError(std::string("stage ") + name + ": " + e.what());
    } catch (const IoError &e) {
        throw IoError(std::string("stage ") + name + ": " + e.what());
    }
    m.stage(name, seconds_since(t0));
}

}  // namespace

int cmd_pipeline(const PipelineOptions &o, std::ostream &log) {
    const CodeFamily family = parse_family(o.family);
    if (family == CodeFamily::Surface2) {
        throw ValidationError("pipeline decodes repetition codes");
    }
    const NodeOrder order = parse_order(o.order);
    const uint64_t seed = resolve_seed(o.seed);
    NoiseModel noise = o.noise.resolve(family);
    const std::vector<Weighting> weightings = {Weighting::Uniform, Weighting::Bootstrap, Weighting::Pij,
                                               Weighting::FirstPrinciples};
    Manifest m("pipeline");
    m.noise(noise);
    m.set("config", {{"family", o.family},
                     {"distances", o.distances},
                     {"rounds", o.rounds},
                     {"shots", o.shots},
                     {"seed", seed},
                     {"archives", o.archives},
                     {"subsample", o.subsample},
                     {"filter_bursts", o.filter_bursts},
                     {"k_sigma", o.k_sigma},
                     {"cooldown", o.cooldown},
                     {"exclude", o.exclude},
                     {"min_rounds", o.min_rounds},
                     {"order", o.order},
                     {"workers", o.workers}});

    // Everything is computed before the first write so a failing stage leaves
    // no partial outputs behind.
    std::vector<Dataset> data;
    run_stage("load", m, [&] {
        if (!o.archives.empty()) {
            for (const std::string &text : o.archives) {
                ArchiveInput a = parse_archive_input(text);
                CodeSpec spec = CodeSpec::repetition(family, a.distance, a.rounds);
                RecordShape shape;
                std::vector<ShotRecord> shots = read_shot_archive(a.path, &shape);
                if (shots.empty()) {
                    throw ValidationError("archive " + a.path + " has no shots");
                }
                if (shape != shape_of(spec)) {
                    throw ValidationError("archive " + a.path + " does not match d=" + std::to_string(a.distance) +
                                          ", rounds=" + std::to_string(a.rounds));
                }
                data.push_back({a.distance, a.rounds, extract_detections(shots, spec, seed), {}});
            }
        } else {
            if (o.shots == 0) {
                throw ValidationError("pipeline needs at least one shot");
            }
            for (uint32_t d : o.distances) {
                for (uint32_t n : o.rounds) {
                    CodeSpec spec = CodeSpec::repetition(family, d, n);
                    DetectionSampler s(spec, noise, seed + 1000003ull * d + n);
                    data.push_back({d, n, s.sample_set(o.shots), {}});
                }
            }
        }
    });

    if (o.filter_bursts) {
        run_stage("filter", m, [&] {
            for (Dataset &ds : data) {
                BurstFilterResult f = burst_filter(ds.set, o.k_sigma, o.cooldown);
                ds.bursts = {{"threshold", f.threshold},
                             {"removed_count", f.removed_count},
                             {"removed", ranges_json(f.removed)}};
                ds.set = std::move(f.kept);
                if (ds.set.shots.empty()) {
                    throw NumericError("burst filter removed every shot");
                }
            }
        });
    }

    Json report;
    std::ostringstream def_csv;
    run_stage("detect", m, [&] {
        def_csv << std::setprecision(17) << "d,rounds,t,def\n";
        Json sets = Json::array();
        for (const Dataset &ds : data) {
            DefReport r = def_report(ds.set);
            for (size_t t = 0; t < r.per_round.size(); ++t) {
                def_csv << ds.d << ',' << ds.rounds << ',' << t << ',' << r.per_round[t] << '\n';
            }
            Json entry = {{"d", ds.d}, {"rounds", ds.rounds}, {"shots", ds.set.shots.size()}, {"bulk_def", r.bulk()}};
            if (!ds.bursts.is_null()) {
                entry["bursts"] = ds.bursts;
            }
            sets.push_back(entry);
        }
        report["datasets"] = sets;
    });

    const Dataset *largest = &data.front();
    for (const Dataset &ds : data) {
        if (ds.d > largest->d || (ds.d == largest->d && ds.rounds > largest->rounds)) {
            largest = &ds;
        }
    }
    std::ostringstream pij_csv;
    Json edges;
    run_stage("correlate", m, [&] {
        CorrelationMatrix cm = pij_exact(largest->set);
        write_matrix_csv(pij_csv, cm, order);
        edges = edges_json(classify_edges(cm, largest->set.layout));
        edges["d"] = largest->d;
        edges["rounds"] = largest->rounds;
    });

    // Decoding units: (distance, rounds, detection sets of every sub-chain).
    struct Unit {
        uint32_t d;
        uint32_t rounds;
        std::vector<DetectionSet> sets;
    };
    std::vector<Unit> units;
    run_stage("subsample", m, [&] {
        for (const Dataset &ds : data) {
            if (!o.subsample) {
                units.push_back({ds.d, ds.rounds, {ds.set}});
                continue;
            }
            for (uint32_t child_d : o.distances) {
                if (child_d > ds.d) continue;
                CodeLayout child = layout_of(CodeSpec::repetition(family, child_d, ds.rounds));
                Unit u{child_d, ds.rounds, {}};
                for (const SubsampleMap &map : subsample_maps(ds.d, child_d)) {
                    DetectionSet sub{child, {}};
                    sub.shots.reserve(ds.set.shots.size());
                    for (const DetectionTensor &t : ds.set.shots) {
                        sub.shots.push_back(subsample(t, ds.set.layout, child, map));
                    }
                    u.sets.push_back(std::move(sub));
                }
                units.push_back(std::move(u));
            }
        }
    });

    std::map<Weighting, std::vector<std::tuple<uint32_t, uint32_t, LogicalRate>>> logical;
    run_stage("decode", m, [&] {
        // Trained weights come from the longest run of each distance.
        std::map<uint32_t, const Unit *> longest;
        for (const Unit &u : units) {
            auto it = longest.find(u.d);
            if (it == longest.end() || u.rounds > it->second->rounds) longest[u.d] = &u;
        }
        for (Weighting w : weightings) {
            std::map<uint32_t, std::unique_ptr<MatchingGraph>> trained;
            if (w == Weighting::Bootstrap || w == Weighting::Pij) {
                for (auto [d, u] : longest) {
                    const DetectionSet &train = u->sets.front();
                    trained[d] = std::make_unique<MatchingGraph>(w == Weighting::Pij ? weights_pij(train)
                                                                                     : weights_bootstrap(train));
                }
            }
            for (const Unit &u : units) {
                CodeSpec spec = CodeSpec::repetition(family, u.d, u.rounds);
                MatchingGraph graph = trained.count(u.d) ? trained[u.d]->retarget(layout_of(spec))
                                      : w == Weighting::FirstPrinciples ? weights_first_principles(spec, noise)
                                                                        : weights_uniform(layout_of(spec));
                uint64_t errors = 0, shots = 0;
                for (const DetectionSet &s : u.sets) {
                    errors += count_logical_errors(s.shots, graph, o.workers);
                    shots += s.shots.size();
                }
                logical[w].push_back({u.d, u.rounds, binomial_rate(errors, shots)});
            }
        }
    });

    std::map<Weighting, FitResult> fits;
    run_stage("fit", m, [&] {
        for (Weighting w : weightings) {
            std::vector<LogicalRow> rows;
            for (const auto &[d, n, r] : logical[w]) {
                rows.push_back({d, n, r.p, r.se, r.shots});
            }
            fits[w] = fit_rows(rows, o.exclude, o.min_rounds);
        }
    });

    std::ostringstream summary;
    summary << std::setprecision(6) << "method,C,C_err,lambda,lambda_err\n";
    for (Weighting w : weightings) {
        const FitResult &f = fits[w];
        summary << weighting_name(w) << ',' << f.c << ',' << f.c_err << ',' << f.lambda << ',' << f.lambda_err << '\n';
    }
    report["summary"] = Json::array();
    for (Weighting w : weightings) {
        report["summary"].push_back(
            {{"method", weighting_name(w)}, {"C", fits[w].c}, {"C_err", fits[w].c_err}, {"lambda", fits[w].lambda},
             {"lambda_err", fits[w].lambda_err}});
    }
    report["correlation"] = edges;

    run_stage("write", m, [&] {
        fs::create_directories(o.out_dir);
        auto put = [&](const std::string &name, const std::string &text) {
            std::string path = (fs::path(o.out_dir) / name).string();
            write_text_file(path, text);
            m.output(path);
        };
        put("def.csv", def_csv.str());
        put("pij.csv", pij_csv.str());
        put("edges.json", edges.dump(2) + "\n");
        for (Weighting w : weightings) {
            put(std::string("logical_") + weighting_name(w) + ".csv", logical_csv(logical[w]));
            put(std::string("lambda_") + weighting_name(w) + ".json", lambda_json(fits[w]).dump(2) + "\n");
        }
        put("summary.csv", summary.str());
        put("report.json", report.dump(2) + "\n");
    });
    m.write((fs::path(o.out_dir) / "manifest.json").string());

    log << "pipeline: " << data.size() << " datasets, results in " << o.out_dir << "\n";
    log << "  method            C          Lambda\n";
    for (Weighting w : weightings) {
        const FitResult &f = fits[w];
        log << "  " << std::left << std::setw(17) << weighting_name(w) << std::right << std::setprecision(3)
            << std::setw(6) << f.c << " +- " << std::setw(6) << f.c_err << "  " << std::setw(5) << f.lambda << " +- "
            << f.lambda_err << "\n";
    }
    return 0;
}

namespace {

void add_code_options(CLI::App *app, CodeOptions &c) {
    app->add_option("--family", c.family, "rep-bit, rep-phase or surface2")->capture_default_str();
    app->add_option("--distance", c.distance, "Code distance")->capture_default_str();
    app->add_option("--rounds", c.rounds, "QEC rounds")->capture_default_str();
    app->add_option("--basis", c.basis, "Surface2 basis (X or Z)")->capture_default_str();
    app->add_option("--init", c.init, "'random' or a data bitstring")->capture_default_str();
    app->add_option("--init-batch", c.init_batch, "Shots per random initialization string")->capture_default_str();
}

void add_noise_options(CLI::App *app, NoiseOptions &n) {
    app->add_option("--noise", n.file, "Noise config JSON file");
    app->add_option("--preset", n.preset,
                    "zero, bit-flip-budget, phase-flip-budget, boundary-study or surface2 (default: the family's)");
}

std::string scalar_text(const Json &v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_object() && v.contains("path")) {
        // archive entry {path, distance, rounds}
        return v["path"].get<std::string>() + ":" + std::to_string(v.value("distance", 0u)) + ":" +
               std::to_string(v.value("rounds", 0u));
    }
    return v.dump();
}

/// Fills options the command line left unset from a JSON config. Keys are
/// option names with '-' or '_'; "code" objects are flattened and a "noise"
/// object is kept as inline noise.
void apply_config(CLI::App *app, const std::string &path, NoiseOptions *noise) {
    Json cfg = read_json_file(path);
    if (!cfg.is_object()) {
        throw ValidationError("config file must hold a JSON object");
    }
    if (cfg.contains("code")) {
        Json code = cfg["code"];
        for (auto &[k, v] : code.items()) {
            if (!cfg.contains(k)) cfg[k] = v;
        }
        cfg.erase("code");
    }
    if (cfg.contains("noise") && cfg["noise"].is_object()) {
        if (noise == nullptr) {
            throw ValidationError("this command takes no noise model");
        }
        noise->inline_json = cfg["noise"];
        cfg.erase("noise");
    }
    for (auto &[key, value] : cfg.items()) {
        std::string name = key;
        std::replace(name.begin(), name.end(), '_', '-');
        CLI::Option *opt = nullptr;
        try {
            opt = app->get_option("--" + name);
        } catch (const CLI::OptionNotFound &) {
            throw ValidationError("unknown config key '" + key + "'");
        }
        if (opt->count() > 0) {
            continue;  // command line wins
        }
        if (name == "noise" && noise) {
            noise->inline_json = nullptr;  // a file path from the config
        }
        if (value.is_array()) {
            for (const Json &v : value) opt->add_result(scalar_text(v));
        } else {
            opt->add_result(scalar_text(value));
        }
        opt->run_callback();
    }
}

}  // namespace

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    CLI::App app{"repstab: repetition-code stabilizer experiments, correlation analysis and decoding"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    SimulateOptions sim;
    DetectOptions det;
    CorrelateOptions cor;
    DecodeOptions dec;
    FitOptions fit;
    BudgetOptions bud;
    ProjectOptions prj;
    PipelineOptions pip;
    std::map<CLI::App *, std::string> config;
    std::map<CLI::App *, NoiseOptions *> noise_of;

    auto with_config = [&](CLI::App *sub) { sub->add_option("--config", config[sub], "JSON config file"); };

    CLI::App *s = app.add_subcommand("simulate", "Sample shot records into an archive");
    add_code_options(s, sim.code);
    add_noise_options(s, sim.noise);
    s->add_option("--shots", sim.shots)->capture_default_str();
    s->add_option("--seed", sim.seed, "Seed (REPSTAB_SEED overrides)")->capture_default_str();
    s->add_option("--out", sim.out)->capture_default_str();
    with_config(s);
    noise_of[s] = &sim.noise;

    CLI::App *d = app.add_subcommand("detect", "Shot archive to detection events and DEF report");
    add_code_options(d, det.code);
    d->add_option("--archive", det.archive)->required();
    d->add_option("--seed", det.seed, "Seed used by simulate (initialization strings)")->capture_default_str();
    d->add_option("--out", det.out)->capture_default_str();
    d->add_option("--def-out", det.def_out);
    d->add_flag("--filter-bursts", det.filter_bursts);
    d->add_option("--k-sigma", det.k_sigma)->capture_default_str();
    d->add_option("--cooldown", det.cooldown)->capture_default_str();
    with_config(d);

    CLI::App *c = app.add_subcommand("correlate", "p_ij matrix and edge classes");
    add_code_options(c, cor.code);
    c->add_option("--detections", cor.detections)->required();
    c->add_option("--out", cor.out)->capture_default_str();
    c->add_option("--edges-out", cor.edges_out);
    c->add_option("--order", cor.order, "time-first or space-first")->capture_default_str();
    c->add_flag("--approx", cor.approx, "Use the first-order estimator");
    with_config(c);

    CLI::App *x = app.add_subcommand("decode", "Minimum-weight perfect matching");
    add_code_options(x, dec.code);
    add_noise_options(x, dec.noise);
    x->add_option("--detections", dec.detections)->required();
    x->add_option("--weights", dec.weights, "uniform, bootstrap, pij or first-principles")->capture_default_str();
    x->add_option("--train", dec.train, "Training detections for bootstrap and pij");
    x->add_option("--out", dec.out)->capture_default_str();
    x->add_option("--workers", dec.workers)->capture_default_str();
    with_config(x);
    noise_of[x] = &dec.noise;

    CLI::App *f = app.add_subcommand("fit", "Logical error per round and Lambda");
    f->add_option("--input", fit.input, "CSV d,rounds,p_error,se,shots")->required();
    f->add_option("--out", fit.out)->capture_default_str();
    f->add_option("--exclude", fit.exclude, "Distances left out of the Lambda fit")->capture_default_str();
    f->add_option("--min-rounds", fit.min_rounds)->capture_default_str();
    with_config(f);

    CLI::App *b = app.add_subcommand("budget", "Error budget of Lambda^-1");
    b->add_option("--family", bud.family)->capture_default_str();
    add_noise_options(b, bud.noise);
    b->add_option("--distances", bud.distances)->capture_default_str();
    b->add_option("--rounds", bud.rounds)->capture_default_str();
    b->add_option("--shots", bud.shots)->capture_default_str();
    b->add_option("--max-shots", bud.max_shots)->capture_default_str();
    b->add_option("--seed", bud.seed)->capture_default_str();
    b->add_option("--workers", bud.workers)->capture_default_str();
    b->add_option("--out", bud.out)->capture_default_str();
    with_config(b);
    noise_of[b] = &bud.noise;

    CLI::App *p = app.add_subcommand("project", "Distance and qubits for a target logical error");
    p->add_option("--lambda", prj.lambda)->required();
    p->add_option("--target", prj.target)->capture_default_str();
    p->add_option("--out", prj.out);
    with_config(p);

    CLI::App *q = app.add_subcommand("pipeline", "detect, correlate, decode with all weightings, fit");
    q->add_option("--family", pip.family)->capture_default_str();
    add_noise_options(q, pip.noise);
    q->add_option("--distances", pip.distances)->capture_default_str();
    q->add_option("--rounds", pip.rounds)->capture_default_str();
    q->add_option("--shots", pip.shots)->capture_default_str();
    q->add_option("--seed", pip.seed)->capture_default_str();
    q->add_option("--archives", pip.archives, "Provided archives as path:distance:rounds");
    q->add_flag("--subsample", pip.subsample, "Decode every sub-chain of the archives");
    q->add_flag("--filter-bursts", pip.filter_bursts);
    q->add_option("--k-sigma", pip.k_sigma)->capture_default_str();
    q->add_option("--cooldown", pip.cooldown)->capture_default_str();
    q->add_option("--exclude", pip.exclude)->capture_default_str();
    q->add_option("--min-rounds", pip.min_rounds)->capture_default_str();
    q->add_option("--order", pip.order)->capture_default_str();
    q->add_option("--workers", pip.workers)->capture_default_str();
    q->add_option("--out-dir", pip.out_dir)->capture_default_str();
    with_config(q);
    noise_of[q] = &pip.noise;

    try {
        try {
            app.parse(argc, argv);
        } catch (const CLI::ParseError &e) {
            int code = app.exit(e, out, err);
            return code == 0 ? 0 : 2;
        }
        CLI::App *sub = app.get_subcommands().front();
        if (!config[sub].empty()) {
            apply_config(sub, config[sub], noise_of.count(sub) ? noise_of[sub] : nullptr);
        }
        if (sub == s) return cmd_simulate(sim, out);
        if (sub == d) return cmd_detect(det, out);
        if (sub == c) return cmd_correlate(cor, out);
        if (sub == x) return cmd_decode(dec, out);
        if (sub == f) return cmd_fit(fit, out);
        if (sub == b) return cmd_budget(bud, out);
        if (sub == p) return cmd_project(prj, out);
        return cmd_pipeline(pip, out);
    } catch (const ValidationError &e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const CLI::Error &e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError &e) {
        err << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const IoError &e) {
        err << "I/O error: " << e.what() << "\n";
        return 4;
    } catch (const fs::filesystem_error &e) {
        err << "I/O error: " << e.what() << "\n";
        return 4;
    }
}

}  // namespace repstab::cli

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

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "repstab/errors.h"

namespace repstab {

double eps_ansatz(double eps, uint32_t rounds) {
    return -0.5 * std::expm1(static_cast<double>(rounds) * std::log1p(-2.0 * eps));
}

double eps_from_p(double p, uint32_t rounds) {
    if (rounds == 0) {
        throw ValidationError("eps_from_p needs at least one round");
    }
    if (!(p >= 0.0) || p >= 0.5) {
        throw NumericError("logical error probability outside [0, 0.5)");
    }
    return -0.5 * std::expm1(std::log1p(-2.0 * p) / rounds);
}

EpsFit fit_eps_per_round(const std::vector<RoundPoint> &points, uint32_t min_rounds) {
    std::vector<RoundPoint> use;
    for (const RoundPoint &pt : points) {
        if (pt.rounds > min_rounds) {
            use.push_back(pt);
        }
    }
    if (use.size() < 3) {
        throw ValidationError("fit_eps_per_round needs at least three points above the round cutoff");
    }
    const bool weighted = std::all_of(use.begin(), use.end(), [](const RoundPoint &p) { return p.shots > 0; });

    std::vector<double> start;
    for (const RoundPoint &pt : use) {
        start.push_back(eps_from_p(std::clamp(pt.p, 0.0, 0.4999999), pt.rounds));
    }
    std::nth_element(start.begin(), start.begin() + start.size() / 2, start.end());
    double eps = start[start.size() / 2];

    auto variance = [&](const RoundPoint &pt, double f) {
        double n = static_cast<double>(pt.shots);
        return std::max(f * (1 - f), 1.0 / n) / n;
    };
    double info = 0;
    for (int iter = 0; iter < 200; ++iter) {
        double num = 0;
        info = 0;
        for (const RoundPoint &pt : use) {
            double f = eps_ansatz(eps, pt.rounds);
            double jac = pt.rounds * std::pow(1.0 - 2.0 * eps, static_cast<double>(pt.rounds) - 1.0);
            double w = weighted ? 1.0 / variance(pt, f) : 1.0;
            num += w * jac * (pt.p - f);
            info += w * jac * jac;
        }
        double step = num / info;
        double next = std::clamp(eps + step, 0.0, 0.4999999);
        bool done = std::abs(next - eps) <= 1e-15 * std::max(eps, 1e-300);
        eps = next;
        if (done) {
            break;
        }
    }
    if (!std::isfinite(eps)) {
        throw NumericError("logical error fit did not converge");
    }

    EpsFit out;
    out.eps = eps;
    out.min_rounds = min_rounds;
    out.points = use.size();
    if (weighted) {
        out.se = 1.0 / std::sqrt(info);
    } else {
        double sse = 0;
        for (const RoundPoint &pt : use) {
            double r = pt.p - eps_ansatz(eps, pt.rounds);
            sse += r * r;
        }
        out.se = std::sqrt(sse / static_cast<double>(use.size() - 1) / info);
    }
    return out;
}

namespace {

struct Line {
    double slope = 0;
    double intercept = 0;
    double slope_se = 0;
    double intercept_se = 0;
};

/// Weighted least squares y = a + b x. With `known` the weights are inverse
/// variances and the covariance is scaled up by the reduced chi^2 when it
/// exceeds one; otherwise the residual variance sets the scale.
Line fit_line(const std::vector<double> &x, const std::vector<double> &y, const std::vector<double> &w, bool known) {
    double sw = 0, sx = 0, sy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sw += w[i];
        sx += w[i] * x[i];
        sy += w[i] * y[i];
    }
    double mx = sx / sw, my = sy / sw;
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sxx += w[i] * (x[i] - mx) * (x[i] - mx);
        sxy += w[i] * (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0)) {
        throw ValidationError("line fit needs at least two distinct abscissae");
    }
    Line L;
    L.slope = sxy / sxx;
    L.intercept = my - L.slope * mx;
    double chi2 = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        double r = y[i] - L.intercept - L.slope * x[i];
        chi2 += w[i] * r * r;
    }
    double dof = static_cast<double>(x.size()) - 2.0;
    double scale = 0;
    if (known) {
        scale = dof > 0 ? std::max(1.0, chi2 / dof) : 1.0;
    } else if (dof > 0) {
        scale = chi2 / dof;
    }
    L.slope_se = std::sqrt(scale / sxx);
    L.intercept_se = std::sqrt(scale * (1.0 / sw + mx * mx / sxx));
    return L;
}

}  // namespace

FitResult fit_lambda(const std::vector<DistancePoint> &points, const std::vector<uint32_t> &exclude) {
    FitResult out;
    out.per_distance = points;
    std::vector<double> x, y, w;
    bool known = true;
    for (const DistancePoint &pt : points) {
        if (std::find(exclude.begin(), exclude.end(), pt.d) != exclude.end()) {
            out.excluded.push_back(pt.d);
            continue;
        }
        if (!(pt.eps > 0.0 && pt.eps < 0.5)) {
            throw NumericError("fit_lambda: eps must lie in (0, 0.5) at d=" + std::to_string(pt.d));
        }
        out.used.push_back(pt.d);
        x.push_back((pt.d + 1) / 2.0);
        y.push_back(std::log(pt.eps));
        double rel = pt.se / pt.eps;
        known = known && rel > 0;
        w.push_back(rel > 0 ? 1.0 / (rel * rel) : 1.0);
    }
    if (out.used.size() < 2) {
        throw ValidationError("fit_lambda needs at least two included distances");
    }
    if (!known) {
        std::fill(w.begin(), w.end(), 1.0);
    }
    Line L = fit_line(x, y, w, known);
    out.slope = L.slope;
    out.intercept = L.intercept;
    out.lambda = std::exp(-L.slope);
    out.lambda_err = out.lambda * L.slope_se;
    out.c = std::exp(L.intercept);
    out.c_err = out.c * L.intercept_se;
    out.flagged = out.lambda <= 1.0;
    return out;
}

ErrorBudget error_budget(const NoiseModel &noise, BudgetBackend &backend, double target_rel_se) {
    noise.validate();
    NoiseModel x;
    x.x = noise.x;
    NoiseModel half = x.scaled(0.5);

    auto with_retry = [&](uint64_t shots, auto &&eval) {
        for (;;) {
            try {
                auto r = eval(shots);
                return std::make_pair(r, shots);
            } catch (const NumericError &) {
                if (shots > backend.max_shots() / 2) {
                    throw;
                }
                shots *= 2;
            }
        }
    };

    ErrorBudget out;
    for (Component c : kAllComponents) {
        BudgetComponent bc;
        bc.name = std::string(component_name(c));
        bc.rate = x.rate(c);
        if (bc.rate > 0) {
            double h = bc.rate / 4;
            NoiseModel lo = half, hi = half;
            lo.rate(c) -= h;
            hi.rate(c) += h;
            uint64_t shots = backend.initial_shots();
            DiffEstimate pe;
            for (;;) {
                auto [r, used] = with_retry(shots, [&](uint64_t n) {
                    DiffEstimate e = backend.evaluate_pair(lo, hi, n);
                    if (!std::isfinite(e.diff.value) || !std::isfinite(e.diff.se)) {
                        throw NumericError("non-finite Lambda^-1 at a perturbed point");
                    }
                    return e;
                });
                pe = r;
                shots = used;
                bc.converged = pe.diff.se <= target_rel_se * std::abs(pe.diff.value);
                if (bc.converged || shots > backend.max_shots() / 2) {
                    break;
                }
                shots *= 2;
            }
            bc.shots = shots;
            bc.weight = pe.diff.value / (2 * h);
            bc.weight_se = pe.diff.se / (2 * h);
            if (c == Component::I && bc.weight < 0) {
                bc.weight = 0;
                bc.zeroed = true;
            }
            bc.contribution = bc.weight * bc.rate;
        }
        out.total += bc.contribution;
        out.components.push_back(bc);
    }
    for (BudgetComponent &bc : out.components) {
        bc.pct = out.total != 0 ? 100.0 * bc.contribution / out.total : 0.0;
    }
    auto [direct, used] = with_retry(backend.initial_shots(), [&](uint64_t n) {
        Estimate e = backend.evaluate(x, n);
        if (!std::isfinite(e.value)) {
            throw NumericError("non-finite Lambda^-1 at the operating point");
        }
        return e;
    });
    (void)used;
    out.direct = direct.value;
    out.direct_se = direct.se;
    out.stray = out.direct - out.total;
    return out;
}

SimulationBackend::SimulationBackend(Config cfg) : cfg_(std::move(cfg)) {
    if (cfg_.distances.size() < 2 || cfg_.rounds == 0 || cfg_.batches < 2 || cfg_.shots < cfg_.batches) {
        throw ValidationError("simulation backend needs two distances, one round and a shot per batch");
    }
    if (cfg_.family == CodeFamily::Surface2) {
        throw ValidationError("simulation backend runs repetition codes");
    }
}

std::vector<std::vector<std::vector<uint64_t>>> SimulationBackend::run(const std::vector<NoiseModel> &models,
                                                                       uint64_t shots) {
    std::array<double, kNumComponents> env{};
    for (const NoiseModel &m : models) {
        for (size_t k = 0; k < kNumComponents; ++k) {
            env[k] = std::max(env[k], m.x[k]);
        }
    }
    const uint32_t B = cfg_.batches;
    const uint64_t per = (shots + B - 1) / B;
    std::vector<std::vector<std::vector<uint64_t>>> counts(
        models.size(), std::vector<std::vector<uint64_t>>(cfg_.distances.size(), std::vector<uint64_t>(B, 0)));
    for (size_t di = 0; di < cfg_.distances.size(); ++di) {
        CodeSpec spec = CodeSpec::repetition(cfg_.family, cfg_.distances[di], cfg_.rounds);
        uint64_t seed = cfg_.seed * 0x9E3779B97F4A7C15ull + cfg_.distances[di];
        NoiseModel mid;
        for (const NoiseModel &m : models) {
            for (size_t k = 0; k < kNumComponents; ++k) {
                mid.x[k] += m.x[k] / models.size();
            }
        }
        MatchingGraph graph = weights_first_principles(spec, mid);
        for (size_t mi = 0; mi < models.size(); ++mi) {
            DetectionSampler sampler(spec, models[mi], seed);
            sampler.set_envelope(env);
            std::vector<DetectionTensor> buf;
            for (uint32_t b = 0; b < B; ++b) {
                buf.clear();
                sampler.sample(b * per, per, buf);
                counts[mi][di][b] = count_logical_errors(buf, graph, cfg_.workers);
            }
        }
    }
    return counts;
}

namespace {

/// Lambda^-1 from per-distance error counts.
double lambda_inv(const std::vector<uint32_t> &distances, const std::vector<uint64_t> &errors, uint64_t shots,
                  uint32_t rounds) {
    std::vector<double> x, y, w(distances.size(), 1.0);
    for (size_t i = 0; i < distances.size(); ++i) {
        double eps = eps_from_p(static_cast<double>(errors[i]) / shots, rounds);
        if (!(eps > 0)) {
            throw NumericError("no logical errors at d=" + std::to_string(distances[i]));
        }
        x.push_back((distances[i] + 1) / 2.0);
        y.push_back(std::log(eps));
    }
    return std::exp(fit_line(x, y, w, false).slope);
}

/// Pooled value and leave-one-batch-out replicates for one model.
std::pair<double, std::vector<double>> jackknife(const std::vector<std::vector<uint64_t>> &counts,
                                                 const std::vector<uint32_t> &distances, uint64_t per,
                                                 uint32_t rounds) {
    const size_t B = counts[0].size();
    std::vector<uint64_t> total(distances.size(), 0);
    for (size_t d = 0; d < distances.size(); ++d) {
        for (uint64_t c : counts[d]) {
            total[d] += c;
        }
    }
    double full = lambda_inv(distances, total, per * B, rounds);
    std::vector<double> reps;
    for (size_t b = 0; b < B; ++b) {
        std::vector<uint64_t> loo(total);
        for (size_t d = 0; d < distances.size(); ++d) {
            loo[d] -= counts[d][b];
        }
        reps.push_back(lambda_inv(distances, loo, per * (B - 1), rounds));
    }
    return {full, reps};
}

double jackknife_se(const std::vector<double> &reps) {
    double n = static_cast<double>(reps.size());
    double mean = 0;
    for (double r : reps) {
        mean += r / n;
    }
    double ss = 0;
    for (double r : reps) {
        ss += (r - mean) * (r - mean);
    }
    return std::sqrt((n - 1) / n * ss);
}

}  // namespace

Estimate SimulationBackend::evaluate(const NoiseModel &noise, uint64_t shots) {
    auto counts = run({noise}, shots);
    uint64_t per = (shots + cfg_.batches - 1) / cfg_.batches;
    auto [v, reps] = jackknife(counts[0], cfg_.distances, per, cfg_.rounds);
    return {v, jackknife_se(reps)};
}

DiffEstimate SimulationBackend::evaluate_pair(const NoiseModel &lo, const NoiseModel &hi, uint64_t shots) {
    auto counts = run({lo, hi}, shots);
    uint64_t per = (shots + cfg_.batches - 1) / cfg_.batches;
    auto [vl, rl] = jackknife(counts[0], cfg_.distances, per, cfg_.rounds);
    auto [vh, rh] = jackknife(counts[1], cfg_.distances, per, cfg_.rounds);
    std::vector<double> rd(rl.size());
    for (size_t b = 0; b < rl.size(); ++b) {
        rd[b] = rh[b] - rl[b];
    }
    DiffEstimate out;
    out.lo = {vl, jackknife_se(rl)};
    out.hi = {vh, jackknife_se(rh)};
    out.diff = {vh - vl, jackknife_se(rd)};
    return out;
}

PostselectStats postselect_stats(const std::vector<DetectionSet> &runs) {
    if (runs.empty()) {
        throw ValidationError("postselect_stats needs at least one run");
    }
    const DetectionSet *longest = &runs[0];
    for (const DetectionSet &r : runs) {
        if (r.layout.family != CodeFamily::Surface2) {
            throw ValidationError("postselect_stats expects distance-2 surface-code runs");
        }
        if (r.shots.empty()) {
            throw ValidationError("postselect_stats: empty run");
        }
        if (r.layout.rounds > longest->layout.rounds) {
            longest = &r;
        }
    }
    PostselectStats out;

    // First stabilizer round with a detection; rounds when there is none.
    const CodeLayout &L = longest->layout;
    std::vector<uint64_t> first_hit(L.rounds + 1, 0);
    for (const DetectionTensor &t : longest->shots) {
        uint32_t first = L.rounds;
        for (uint32_t node : t.events) {
            first = std::min(first, L.node_t(node));
        }
        ++first_hit[first];
    }
    uint64_t alive = longest->shots.size();
    std::vector<double> x, y;
    for (uint32_t n = 1; n <= L.rounds; ++n) {
        alive -= first_hit[n - 1];
        if (alive == 0) {
            out.truncated = true;
            break;
        }
        double frac = static_cast<double>(alive) / longest->shots.size();
        out.rounds.push_back(n);
        out.retained.push_back(frac);
        x.push_back(n);
        y.push_back(std::log(frac));
    }
    if (x.size() >= 2) {
        Line fit = fit_line(x, y, std::vector<double>(x.size(), 1.0), false);
        out.retained_per_round = std::exp(fit.slope);
        out.retained_per_round_err = out.retained_per_round * fit.slope_se;
    } else if (x.size() == 1) {
        out.retained_per_round = out.retained[0];
    } else {
        out.retained_per_round = 0;
    }

    std::vector<double> rx, ry, rw;
    for (const DetectionSet &r : runs) {
        uint64_t kept = 0, bad = 0;
        for (const DetectionTensor &t : r.shots) {
            if (t.events.empty()) {
                ++kept;
                bad += t.observable;
            }
        }
        out.run_rounds.push_back(r.layout.rounds);
        out.run_kept.push_back(kept);
        if (kept == 0) {
            out.truncated = true;
            out.logical.push_back(std::numeric_limits<double>::quiet_NaN());
            out.logical_se.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        double p = static_cast<double>(bad) / kept;
        out.logical.push_back(p);
        out.logical_se.push_back(std::sqrt(p * (1 - p) / kept));
        rx.push_back(r.layout.rounds);
        ry.push_back(p);
        rw.push_back(static_cast<double>(kept) / std::max(p * (1 - p), 1.0 / kept));
    }
    bool distinct = rx.size() >= 2 && *std::min_element(rx.begin(), rx.end()) < *std::max_element(rx.begin(), rx.end());
    if (distinct) {
        Line fit = fit_line(rx, ry, rw, true);
        out.error_per_round = fit.slope;
        out.error_per_round_err = fit.slope_se;
    } else if (!rx.empty()) {
        out.error_per_round = ry[0] / rx[0];
        out.error_per_round_err = std::sqrt(1.0 / rw[0]) / rx[0];
    }
    return out;
}

Overhead overhead_projection(double lambda, double target) {
    if (!(lambda > 1.0) || !std::isfinite(lambda)) {
        throw ValidationError("overhead projection has no solution for Lambda <= 1");
    }
    if (!(target > 0.0 && target < 1.0)) {
        throw ValidationError("target logical error must lie in (0, 1)");
    }
    // (d+1)/2 >= ln(1/target) / ln(Lambda), with slack for rounding at exact powers.
    double need = std::log(1.0 / target) / std::log(lambda);
    double k = std::ceil(need - 1e-12 * std::max(1.0, need));
    k = std::max(k, 2.0);
    if (k > 1e9) {
        throw ValidationError("overhead projection: distance out of range");
    }
    Overhead out;
    out.distance = static_cast<uint32_t>(2 * k - 1);
    out.qubits = 2ull * out.distance * out.distance;
    return out;
}

std::vector<SubsampleResult> subsampled_sweep(const DetectionSet &parent, const std::vector<uint32_t> &distances,
                                              const GraphFactory &make_graph) {
    const CodeLayout &P = parent.layout;
    if (P.family == CodeFamily::Surface2) {
        throw ValidationError("subsampling needs a repetition code");
    }
    std::vector<SubsampleResult> out;
    for (uint32_t d : distances) {
        auto maps = subsample_maps(P.distance, d);
        CodeLayout child = layout_of(CodeSpec::repetition(P.family, d, P.rounds));
        MatchingGraph graph = make_graph(child);
        SubsampleResult res;
        res.d = d;
        uint64_t errors = 0, shots = 0;
        std::vector<DetectionTensor> sub;
        for (const SubsampleMap &m : maps) {
            sub.clear();
            for (const DetectionTensor &t : parent.shots) {
                sub.push_back(subsample(t, P, child, m));
            }
            LogicalRate r = logical_error_rate(sub, graph);
            errors += r.errors;
            shots += r.shots;
            res.per_map.push_back(r);
        }
        res.average = binomial_rate(errors, shots);
        out.push_back(std::move(res));
    }
    return out;
}

uint64_t count_logical_errors(const std::vector<DetectionTensor> &shots, const MatchingGraph &graph,
                              unsigned workers) {
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(shots.size() / 64 + 1)));
    std::vector<uint64_t> errors(workers, 0);
    auto work = [&](unsigned w) {
        Decoder dec(graph);
        for (size_t i = w; i < shots.size(); i += workers) {
            errors[w] += dec.decode(shots[i]).logical_error;
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        std::exception_ptr failure;
        std::mutex mu;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    work(w);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(mu);
                    failure = std::current_exception();
                }
            });
        }
        for (std::thread &t : pool) {
            t.join();
        }
        if (failure) {
            std::rethrow_exception(failure);
        }
    }
    uint64_t total = 0;
    for (uint64_t e : errors) {
        total += e;
    }
    return total;
}

}  // namespace repstab

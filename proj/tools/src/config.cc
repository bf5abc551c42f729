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

#include "config.h"

#include <openssl/evp.h>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "repstab/errors.h"

namespace repstab::cli {

namespace {

double number(const Json &j, const char *key, double fallback) {
    if (!j.contains(key)) {
        return fallback;
    }
    if (!j[key].is_number()) {
        throw ValidationError(std::string("noise key '") + key + "' must be a number");
    }
    return j[key].get<double>();
}

}  // namespace

NoiseModel noise_from_json(const Json &j) {
    if (!j.is_object()) {
        throw ValidationError("noise config must be a JSON object");
    }
    static const std::map<std::string, int> known = {{"dd", 0},       {"cz", 0},         {"m", 0}, {"r", 0},
                                                     {"h", 0},        {"i", 0},          {"bursts", 0},
                                                     {"correlated", 0}};
    for (const auto &[k, v] : j.items()) {
        if (!known.count(k)) {
            throw ValidationError("unknown noise key '" + k + "'");
        }
    }
    NoiseModel n = NoiseModel::from_rates(number(j, "dd", 0), number(j, "cz", 0), number(j, "m", 0),
                                          number(j, "r", 0), number(j, "h", 0), number(j, "i", 0));
    if (j.contains("bursts") && !j["bursts"].is_null()) {
        const Json &b = j["bursts"];
        BurstConfig bc;
        bc.rate = number(b, "rate", 0);
        bc.amplitude = number(b, "amplitude", 1);
        bc.decay_shots = number(b, "decay_shots", 1);
        n.bursts = bc;
    }
    if (j.contains("correlated")) {
        for (const Json &c : j["correlated"]) {
            CorrelatedChannel ch;
            std::string kind = c.value("kind", "pair-flip");
            if (kind == "pair-flip") {
                ch.kind = CorrelatedChannel::Kind::PairFlip;
                ch.measure_a = c.value("measure_a", 0u);
                ch.measure_b = c.value("measure_b", 0u);
            } else if (kind == "persistent-flip") {
                ch.kind = CorrelatedChannel::Kind::PersistentFlip;
                ch.data_qubit = c.value("data_qubit", 0u);
                ch.survival = number(c, "survival", 0.5);
            } else {
                throw ValidationError("unknown correlated channel kind '" + kind + "'");
            }
            ch.probability = number(c, "probability", 0);
            n.correlated.push_back(ch);
        }
    }
    n.validate();
    return n;
}

Json noise_to_json(const NoiseModel &n) {
    Json j;
    for (Component c : kAllComponents) {
        std::string key(component_name(c));
        for (char &ch : key) {
            ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        }
        j[key] = n.rate(c);
    }
    if (n.bursts) {
        j["bursts"] = {{"rate", n.bursts->rate},
                       {"amplitude", n.bursts->amplitude},
                       {"decay_shots", n.bursts->decay_shots}};
    }
    if (!n.correlated.empty()) {
        Json arr = Json::array();
        for (const CorrelatedChannel &c : n.correlated) {
            if (c.kind == CorrelatedChannel::Kind::PairFlip) {
                arr.push_back({{"kind", "pair-flip"},
                               {"measure_a", c.measure_a},
                               {"measure_b", c.measure_b},
                               {"probability", c.probability}});
            } else {
                arr.push_back({{"kind", "persistent-flip"},
                               {"data_qubit", c.data_qubit},
                               {"probability", c.probability},
                               {"survival", c.survival}});
            }
        }
        j["correlated"] = arr;
    }
    return j;
}

NoiseModel noise_preset(const std::string &name) {
    if (name == "zero") return NoiseModel::zero();
    if (name == "bit-flip-budget") return NoiseModel::bit_flip_budget();
    if (name == "phase-flip-budget") return NoiseModel::phase_flip_budget();
    if (name == "boundary-study") return NoiseModel::boundary_study();
    if (name == "surface2") return NoiseModel::surface2_model();
    throw ValidationError("unknown noise preset '" + name + "'");
}

std::string default_preset(CodeFamily f) {
    switch (f) {
        case CodeFamily::RepBit:
            return "bit-flip-budget";
        case CodeFamily::RepPhase:
            return "phase-flip-budget";
        case CodeFamily::Surface2:
            return "surface2";
    }
    return "zero";
}

CodeSpec code_from_json(const Json &j) {
    if (!j.is_object()) {
        throw ValidationError("code spec must be a JSON object");
    }
    CodeSpec s;
    s.family = parse_family(j.value("family", std::string("rep-phase")));
    s.distance = j.value("distance", s.family == CodeFamily::Surface2 ? 2u : 3u);
    s.rounds = j.value("rounds", 1u);
    std::string basis = j.value("basis", std::string("Z"));
    if (basis == "X" || basis == "x") {
        s.basis = Basis::X;
    } else if (basis == "Z" || basis == "z") {
        s.basis = Basis::Z;
    } else {
        throw ValidationError("basis must be X or Z");
    }
    std::string init = j.value("init", std::string("random"));
    if (init != "random") {
        std::vector<uint8_t> bits;
        for (char c : init) {
            if (c != '0' && c != '1') {
                throw ValidationError("init must be 'random' or a bitstring");
            }
            bits.push_back(static_cast<uint8_t>(c - '0'));
        }
        s.init = bits;
    }
    s.init_batch = j.value("init_batch", s.init_batch);
    s.validate();
    return s;
}

Json code_to_json(const CodeSpec &s) {
    Json j;
    j["family"] = std::string(family_name(s.family));
    j["distance"] = s.distance;
    j["rounds"] = s.rounds;
    j["basis"] = s.basis == Basis::X ? "X" : "Z";
    if (s.init) {
        std::string bits;
        for (uint8_t b : *s.init) {
            bits.push_back(static_cast<char>('0' + b));
        }
        j["init"] = bits;
    } else {
        j["init"] = "random";
    }
    j["init_batch"] = s.init_batch;
    return j;
}

std::string read_text_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Json read_json_file(const std::string &path) {
    std::string text = read_text_file(path);
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        throw ValidationError(path + ": " + e.what());
    }
}

void write_text_file(const std::string &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) {
        throw IoError("cannot write " + path);
    }
}

std::string sha256_hex(const std::string &bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw IoError("SHA-256 failed");
    }
    std::ostringstream ss;
    for (unsigned int i = 0; i < len; ++i) {
        ss << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    }
    return ss.str();
}

std::string sha256_file(const std::string &path) { return sha256_hex(read_text_file(path)); }

uint64_t resolve_seed(uint64_t fallback) {
    const char *env = std::getenv("REPSTAB_SEED");
    if (env == nullptr || *env == '\0') {
        return fallback;
    }
    char *end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (*end != '\0') {
        throw ValidationError("REPSTAB_SEED must be an unsigned integer");
    }
    return v;
}

Manifest::Manifest(std::string command) {
    body_["tool"] = "repstab";
    body_["version"] = kToolVersion;
    body_["command"] = std::move(command);
    std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::ostringstream ts;
    ts << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
    body_["timestamp"] = ts.str();
    body_["stages"] = Json::object();
    body_["outputs"] = Json::object();
}

void Manifest::noise(const NoiseModel &n) {
    Json j = noise_to_json(n);
    body_["noise"] = j;
    body_["noise_sha256"] = sha256_hex(j.dump());
}

void Manifest::stage(const std::string &name, double seconds) { body_["stages"][name] = seconds; }

void Manifest::output(const std::string &path) { body_["outputs"][path] = ""; }

void Manifest::write(const std::string &path) {
    for (auto &[file, digest] : body_["outputs"].items()) {
        digest = sha256_file(file);
    }
    write_text_file(path, body_.dump(2) + "\n");
}

Json lambda_json(const FitResult &f) {
    Json j;
    Json per = Json::array();
    for (const DistancePoint &p : f.per_distance) {
        per.push_back({{"d", p.d}, {"eps", p.eps}, {"se", p.se}});
    }
    j["per_distance"] = per;
    j["lambda"] = f.lambda;
    j["lambda_err"] = f.lambda_err;
    j["C"] = f.c;
    j["C_err"] = f.c_err;
    j["used"] = f.used;
    j["excluded"] = f.excluded;
    j["min_rounds"] = f.min_rounds;
    j["flagged"] = f.flagged;
    return j;
}

Json budget_json(const ErrorBudget &b) {
    Json comps = Json::array();
    for (const BudgetComponent &c : b.components) {
        comps.push_back({{"name", c.name},
                         {"rate", c.rate},
                         {"weight", c.weight},
                         {"weight_se", c.weight_se},
                         {"contribution", c.contribution},
                         {"pct", c.pct},
                         {"shots", c.shots},
                         {"converged", c.converged},
                         {"zeroed", c.zeroed}});
    }
    return {{"components", comps}, {"total", b.total}, {"direct", b.direct}, {"direct_se", b.direct_se},
            {"stray", b.stray}};
}

}  // namespace repstab::cli

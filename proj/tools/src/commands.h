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

#ifndef REPSTAB_TOOLS_COMMANDS_H
#define REPSTAB_TOOLS_COMMANDS_H

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "config.h"
#include "repstab/codes.h"
#include "repstab/noise.h"

namespace repstab::cli {

struct CodeOptions {
    std::string family = "rep-phase";
    uint32_t distance = 3;
    uint32_t rounds = 10;
    std::string basis = "Z";
    std::string init = "random";
    uint32_t init_batch = 1000;
    CodeSpec resolve() const;
};

/// --noise FILE beats an inline config object, which beats --preset.
struct NoiseOptions {
    std::string file;
    std::string preset;  // empty: the family's default
    Json inline_json;    // from a config file's "noise" object
    NoiseModel resolve(CodeFamily family) const;
};

struct SimulateOptions {
    CodeOptions code;
    NoiseOptions noise;
    uint64_t shots = 1000;
    uint64_t seed = 1;
    std::string out = "shots.rstb";
};

struct DetectOptions {
    CodeOptions code;
    std::string archive;
    uint64_t seed = 1;
    std::string out = "detections.rstb";
    std::string def_out;  // default: <out>.def.json
    bool filter_bursts = false;
    double k_sigma = 5.0;
    uint32_t cooldown = 5;
};

struct CorrelateOptions {
    CodeOptions code;
    std::string detections;
    std::string out = "pij.csv";
    std::string edges_out;  // default: <out>.edges.json
    std::string order = "time-first";
    bool approx = false;
};

struct DecodeOptions {
    CodeOptions code;
    NoiseOptions noise;
    std::string detections;
    std::string weights = "first-principles";
    std::string train;  // detections used by bootstrap and pij; default: the input
    std::string out = "decode.csv";
    unsigned workers = 1;
};

struct FitOptions {
    std::string input;  // CSV: d,rounds,p_error,se,shots
    std::string out = "lambda.json";
    std::vector<uint32_t> exclude{3};
    uint32_t min_rounds = 10;
};

struct BudgetOptions {
    std::string family = "rep-phase";
    NoiseOptions noise;
    std::vector<uint32_t> distances{3, 5};
    uint32_t rounds = 20;
    uint64_t shots = 40000;
    uint64_t max_shots = 1280000;
    uint64_t seed = 1;
    unsigned workers = 1;
    std::string out = "budget.json";
};

struct ProjectOptions {
    double lambda = 0;
    double target = 1e-12;
    std::string out;  // empty: stdout only
};

struct ArchiveInput {
    std::string path;
    uint32_t distance = 0;
    uint32_t rounds = 0;
};

struct PipelineOptions {
    std::string family = "rep-phase";
    NoiseOptions noise;
    std::vector<uint32_t> distances{3, 5, 7, 9, 11};
    std::vector<uint32_t> rounds{1, 2, 4, 6, 8, 10, 12, 15, 20, 25, 30};
    uint64_t shots = 20000;
    uint64_t seed = 1;
    std::vector<std::string> archives;  // "path:distance:rounds"; simulated when empty
    bool subsample = false;
    bool filter_bursts = false;
    double k_sigma = 5.0;
    uint32_t cooldown = 5;
    std::vector<uint32_t> exclude{3};
    uint32_t min_rounds = 10;
    std::string order = "time-first";
    unsigned workers = 1;
    std::string out_dir = "pipeline_out";
};

ArchiveInput parse_archive_input(const std::string &text);

int cmd_simulate(const SimulateOptions &o, std::ostream &log);
int cmd_detect(const DetectOptions &o, std::ostream &log);
int cmd_correlate(const CorrelateOptions &o, std::ostream &log);
int cmd_decode(const DecodeOptions &o, std::ostream &log);
int cmd_fit(const FitOptions &o, std::ostream &log);
int cmd_budget(const BudgetOptions &o, std::ostream &log);
int cmd_project(const ProjectOptions &o, std::ostream &log);
int cmd_pipeline(const PipelineOptions &o, std::ostream &log);

/// Parses argv, runs the command and maps exceptions to exit codes:
/// 0 success, 2 validation, 3 numeric, 4 I/O.
int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

}  // namespace repstab::cli

#endif

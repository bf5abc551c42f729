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

#ifndef REPSTAB_TOOLS_CONFIG_H
#define REPSTAB_TOOLS_CONFIG_H

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "repstab/analysis.h"
#include "repstab/codes.h"
#include "repstab/noise.h"

namespace repstab::cli {

using Json = nlohmann::ordered_json;

inline constexpr const char *kToolVersion = "0.1.0";

/// {dd, cz, m, r, h, i, bursts?, correlated?}
NoiseModel noise_from_json(const Json &j);
Json noise_to_json(const NoiseModel &n);
/// "zero", "bit-flip-budget", "phase-flip-budget", "boundary-study", "surface2".
NoiseModel noise_preset(const std::string &name);
/// Budget rates of the family (surface2 model for surface2).
std::string default_preset(CodeFamily f);

/// {family, distance, rounds, basis, init: "random" | bitstring, init_batch?}
CodeSpec code_from_json(const Json &j);
Json code_to_json(const CodeSpec &s);

Json read_json_file(const std::string &path);
void write_text_file(const std::string &path, const std::string &text);
std::string read_text_file(const std::string &path);

std::string sha256_hex(const std::string &bytes);
std::string sha256_file(const std::string &path);

/// Seed from REPSTAB_SEED when set, else `fallback`.
uint64_t resolve_seed(uint64_t fallback);

/// Provenance of one command invocation.
class Manifest {
   public:
    explicit Manifest(std::string command);
    void set(const std::string &key, Json value) { body_[key] = std::move(value); }
    void noise(const NoiseModel &n);
    void stage(const std::string &name, double seconds);
    void output(const std::string &path);
    /// Writes `<path>` with digests of every registered output.
    void write(const std::string &path);
    const Json &body() const { return body_; }

   private:
    Json body_;
};

Json lambda_json(const FitResult &f);
Json budget_json(const ErrorBudget &b);

}  // namespace repstab::cli

#endif

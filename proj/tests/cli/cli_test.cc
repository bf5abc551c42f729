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

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.h"
#include "config.h"
#include "repstab/records.h"

namespace fs = std::filesystem;
using namespace repstab;
using repstab::cli::Json;

namespace {

class CliTest : public ::testing::Test {
   protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("repstab_cli_" + std::to_string(::getpid()) + "_" +
                                            ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
        ::unsetenv("REPSTAB_SEED");
    }
    void TearDown() override {
        ::unsetenv("REPSTAB_SEED");
        fs::remove_all(dir_);
    }

    std::string path(const std::string &name) const { return (dir_ / name).string(); }

    int run(std::vector<std::string> args) {
        args.insert(args.begin(), "repstab");
        std::vector<const char *> argv;
        for (const std::string &a : args) argv.push_back(a.c_str());
        out_.str("");
        err_.str("");
        return cli::run_cli(static_cast<int>(argv.size()), argv.data(), out_, err_);
    }

    static std::string bytes(const std::string &p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    fs::path dir_;
    std::ostringstream out_, err_;
};

TEST_F(CliTest, ZeroNoiseSimulateMatchesNoiselessRecord) {
    const std::vector<uint8_t> init = {1, 0, 1, 1, 0};
    for (const char *family : {"rep-bit", "rep-phase"}) {
        for (uint32_t rounds : {1u, 2u, 5u}) {
            ASSERT_EQ(run({"simulate", "--family", family, "--distance", "5", "--rounds", std::to_string(rounds),
                           "--init", "10110", "--preset", "zero", "--shots", "50", "--out", path("z.rstb")}),
                      0)
                << err_.str();
            RecordShape shape;
            auto shots = read_shot_archive(path("z.rstb"), &shape);
            ASSERT_EQ(shots.size(), 50u);
            EXPECT_EQ(shape, (RecordShape{4, rounds, 5}));
            // Stabilizers read neighbouring parities every round. The bit-flip
            // code's decoupling pulse flips every data qubit once per round.
            bool flipped = std::string(family) == "rep-bit" && rounds % 2 == 1;
            for (const ShotRecord &s : shots) {
                for (uint32_t t = 0; t < rounds; ++t) {
                    for (uint32_t q = 0; q < 4; ++q) {
                        EXPECT_EQ(s.stabilizer_bits[t * 4 + q], init[q] ^ init[q + 1]);
                    }
                }
                for (uint32_t q = 0; q < 5; ++q) {
                    EXPECT_EQ(s.final_data_bits[q], init[q] ^ (flipped ? 1 : 0)) << family << " rounds " << rounds;
                }
                EXPECT_FALSE(s.burst_flag);
            }
        }
    }
}

TEST_F(CliTest, SameSeedGivesIdenticalArchives) {
    std::vector<std::string> base = {"simulate", "--family", "rep-bit", "--distance", "7", "--rounds", "12",
                                     "--shots", "500"};
    auto with = [&](std::vector<std::string> extra) {
        std::vector<std::string> a = base;
        a.insert(a.end(), extra.begin(), extra.end());
        return a;
    };
    ASSERT_EQ(run(with({"--seed", "11", "--out", path("a.rstb")})), 0);
    ASSERT_EQ(run(with({"--seed", "11", "--out", path("b.rstb")})), 0);
    ASSERT_EQ(run(with({"--seed", "12", "--out", path("c.rstb")})), 0);
    EXPECT_EQ(bytes(path("a.rstb")), bytes(path("b.rstb")));
    EXPECT_NE(bytes(path("a.rstb")), bytes(path("c.rstb")));
}

TEST_F(CliTest, ArchiveRoundTripIsByteIdentical) {
    ASSERT_EQ(run({"simulate", "--family", "rep-phase", "--distance", "5", "--rounds", "9", "--shots", "333",
                   "--out", path("a.rstb")}),
              0);
    RecordShape shape;
    auto shots = read_shot_archive(path("a.rstb"), &shape);
    write_shot_archive(path("b.rstb"), shape, shots);
    EXPECT_EQ(bytes(path("a.rstb")), bytes(path("b.rstb")));
}

TEST_F(CliTest, EnvironmentSeedOverridesFlag) {
    std::vector<std::string> args = {"simulate", "--distance", "3", "--rounds", "6", "--shots", "300"};
    auto a = args, b = args, c = args;
    a.insert(a.end(), {"--seed", "99", "--out", path("a.rstb")});
    ASSERT_EQ(run(a), 0);
    ::setenv("REPSTAB_SEED", "99", 1);
    b.insert(b.end(), {"--seed", "5", "--out", path("b.rstb")});
    ASSERT_EQ(run(b), 0);
    EXPECT_EQ(bytes(path("a.rstb")), bytes(path("b.rstb")));
    Json m = cli::read_json_file(path("b.rstb") + ".manifest.json");
    EXPECT_EQ(m["seed"].get<uint64_t>(), 99u);
    ::setenv("REPSTAB_SEED", "not-a-number", 1);
    c.insert(c.end(), {"--out", path("c.rstb")});
    EXPECT_EQ(run(c), 2);
}

TEST_F(CliTest, ExitCodes) {
    // validation
    EXPECT_EQ(run({"simulate", "--distance", "4", "--out", path("x.rstb")}), 2);
    EXPECT_EQ(run({"simulate", "--bogus-flag"}), 2);
    EXPECT_EQ(run({"project", "--lambda", "0.9"}), 2);
    {
        std::ofstream cfg(path("bad.json"));
        cfg << "{\"distance\": 5, \"no_such_key\": 1}";
    }
    EXPECT_EQ(run({"simulate", "--config", path("bad.json"), "--out", path("x.rstb")}), 2);
    // numeric: a logical error rate at 1/2 has no per-round inversion
    {
        std::ofstream csv(path("p.csv"));
        csv << "d,rounds,p_error,se,shots\n5,4,0.6,0.01,1000\n7,4,0.1,0.01,1000\n";
    }
    EXPECT_EQ(run({"fit", "--input", path("p.csv"), "--out", path("l.json"), "--exclude", "3"}), 3);
    // I/O
    EXPECT_EQ(run({"detect", "--archive", path("missing.rstb"), "--out", path("d.rstb")}), 4);
    EXPECT_EQ(run({"simulate", "--shots", "10", "--out", path("no/such/dir/x.rstb")}), 4);
    EXPECT_EQ(run({"project", "--lambda", "10"}), 0);
}

TEST_F(CliTest, ConfigFileFillsUnsetFlagsOnly) {
    {
        std::ofstream cfg(path("c.json"));
        cfg << R"({"code": {"family": "rep-bit", "distance": 7, "rounds": 3}, "shots": 40, "seed": 3,
                  "noise": {"dd": 0, "cz": 0, "m": 0, "r": 0, "h": 0, "i": 0}})";
    }
    ASSERT_EQ(run({"simulate", "--config", path("c.json"), "--distance", "5", "--out", path("a.rstb")}), 0)
        << err_.str();
    RecordShape shape;
    auto shots = read_shot_archive(path("a.rstb"), &shape);
    EXPECT_EQ(shots.size(), 40u);
    EXPECT_EQ(shape, (RecordShape{4, 3, 5}));
    Json m = cli::read_json_file(path("a.rstb") + ".manifest.json");
    EXPECT_EQ(m["code"]["family"], "rep-bit");
    EXPECT_EQ(m["noise"]["dd"].get<double>(), 0.0);
    EXPECT_EQ(m["outputs"][path("a.rstb")], cli::sha256_file(path("a.rstb")));
}

TEST_F(CliTest, EmptyArchiveFailsWithoutOutputs) {
    CodeSpec spec = CodeSpec::repetition(CodeFamily::RepPhase, 3, 5);
    write_shot_archive(path("empty.rstb"), shape_of(spec), {});
    EXPECT_EQ(run({"pipeline", "--family", "rep-phase", "--archives", path("empty.rstb") + ":3:5", "--out-dir",
                   path("out")}),
              2);
    EXPECT_NE(err_.str().find("stage load"), std::string::npos) << err_.str();
    EXPECT_FALSE(fs::exists(path("out")));
    EXPECT_EQ(run({"detect", "--family", "rep-phase", "--distance", "3", "--rounds", "5", "--archive",
                   path("empty.rstb"), "--out", path("d.rstb")}),
              2);
    EXPECT_FALSE(fs::exists(path("d.rstb")));
}

TEST_F(CliTest, BurstFilterReportsRemovedShots) {
    {
        std::ofstream cfg(path("noise.json"));
        cfg << R"({"dd": 0.005, "cz": 0.005, "m": 0.005, "r": 0.002, "h": 0.001, "i": 0.001,
                  "bursts": {"rate": 0.01, "amplitude": 20, "decay_shots": 20}})";
    }
    ASSERT_EQ(run({"simulate", "--family", "rep-bit", "--distance", "9", "--rounds", "10", "--shots", "20000",
                   "--noise", path("noise.json"), "--seed", "4", "--out", path("s.rstb")}),
              0)
        << err_.str();
    ASSERT_EQ(run({"detect", "--family", "rep-bit", "--distance", "9", "--rounds", "10", "--seed", "4",
                   "--archive", path("s.rstb"), "--filter-bursts", "--out", path("d.rstb")}),
              0)
        << err_.str();
    Json rep = cli::read_json_file(path("d.rstb.def.json"));
    uint64_t removed = rep["bursts"]["removed_count"].get<uint64_t>();
    EXPECT_GT(removed, 0u);
    EXPECT_EQ(rep["kept_shots"].get<uint64_t>() + removed, 20000u);

    // Removed ranges should mostly cover shots the simulator flagged.
    auto shots = read_shot_archive(path("s.rstb"));
    uint64_t removed_flagged = 0;
    for (const Json &r : rep["bursts"]["removed"]) {
        for (uint64_t s = r[0].get<uint64_t>(); s < r[1].get<uint64_t>(); ++s) {
            removed_flagged += shots[s].burst_flag;
        }
    }
    EXPECT_GT(removed_flagged * 2, removed);
}

TEST_F(CliTest, ProjectOverhead) {
    ASSERT_EQ(run({"project", "--lambda", "10", "--out", path("p.json")}), 0);
    Json j = cli::read_json_file(path("p.json"));
    EXPECT_EQ(j["distance"].get<uint32_t>(), 23u);
    EXPECT_EQ(j["qubits"].get<uint64_t>(), 1058u);
}

TEST_F(CliTest, PipelineWritesAllOutputs) {
    ASSERT_EQ(run({"pipeline", "--family", "rep-phase", "--distances", "3", "5", "7", "--rounds", "2", "11", "13",
                   "16", "--shots", "1500", "--filter-bursts", "--out-dir", path("out")}),
              0)
        << err_.str();
    for (const char *f : {"def.csv", "pij.csv", "edges.json", "summary.csv", "report.json", "manifest.json",
                          "logical_uniform.csv", "logical_bootstrap.csv", "logical_pij.csv",
                          "logical_first-principles.csv", "lambda_uniform.json", "lambda_bootstrap.json",
                          "lambda_pij.json", "lambda_first-principles.json"}) {
        EXPECT_TRUE(fs::exists(path("out") + "/" + f)) << f;
    }
    std::string summary = bytes(path("out/summary.csv"));
    EXPECT_EQ(summary.rfind("method,C,C_err,lambda,lambda_err\n", 0), 0u);
    Json m = cli::read_json_file(path("out/manifest.json"));
    for (const char *stage : {"load", "filter", "detect", "correlate", "decode", "fit", "write"}) {
        EXPECT_TRUE(m["stages"].contains(stage)) << stage;
    }
    // fit on the decoded table reproduces the pipeline's own fit
    ASSERT_EQ(run({"fit", "--input", path("out/logical_pij.csv"), "--out", path("l.json")}), 0);
    EXPECT_DOUBLE_EQ(cli::read_json_file(path("l.json"))["lambda"].get<double>(),
                     cli::read_json_file(path("out/lambda_pij.json"))["lambda"].get<double>());
}

TEST_F(CliTest, PipelineAcceptsArchivesAndSubsamples) {
    ASSERT_EQ(run({"simulate", "--family", "rep-phase", "--distance", "7", "--rounds", "12", "--shots", "800",
                   "--seed", "2", "--out", path("a.rstb")}),
              0);
    ASSERT_EQ(run({"pipeline", "--family", "rep-phase", "--archives", path("a.rstb") + ":7:12", "--subsample",
                   "--distances", "3", "5", "7", "--seed", "2", "--out-dir", path("out")}),
              0)
        << err_.str();
    std::string csv = bytes(path("out/logical_uniform.csv"));
    EXPECT_NE(csv.find("\n3,12,"), std::string::npos);
    EXPECT_NE(csv.find("\n5,12,"), std::string::npos);
    EXPECT_NE(csv.find("\n7,12,"), std::string::npos);
}

}  // namespace

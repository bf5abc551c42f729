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

#include "repstab/frame_simulator.h"
#include "repstab/errors.h"

#include <gtest/gtest.h>

#include <bit>
#include <cmath>

#include "repstab/codes.h"
#include "repstab/tableau.h"

using namespace repstab;

namespace {

// Full tableau run with one Pauli (or result flip) inserted at location `loc`.
std::vector<uint8_t> tableau_with_error(const Circuit &c, uint32_t loc, uint8_t pauli, uint64_t seed) {
    Philox4x32 rng(seed);
    uint64_t coins = 0;
    auto coin = [&]() { return static_cast<bool>(rng(0, coins++)[0] & 1); };
    Tableau t(c.qubit_count);
    std::vector<uint8_t> rec;
    uint32_t l = 0;
    for (const auto &m : c.moments) {
        for (const auto &op : m.ops) {
            bool here = op.noise != NoiseClass::None && l++ == loc;
            switch (op.kind) {
                case OpKind::H:
                    t.h(op.q0);
                    break;
                case OpKind::X:
                    t.x(op.q0);
                    break;
                case OpKind::CZ:
                    t.cz(op.q0, op.q1);
                    break;
                case OpKind::M:
                    rec.push_back(t.measure(op.q0, coin()) ^ here);
                    continue;
                case OpKind::R:
                    t.reset(op.q0, coin());
                    break;
                case OpKind::Idle:
                    break;
            }
            if (here) {
                if (pauli & 1) t.x(op.q0);
                if (pauli & 2) t.z(op.q0);
                if (pauli & 4) t.x(op.q1);
                if (pauli & 8) t.z(op.q1);
            }
        }
    }
    return rec;
}

}  // namespace

TEST(frame_simulator, matches_tableau_for_every_single_error) {
    for (CodeFamily f : {CodeFamily::RepBit, CodeFamily::RepPhase}) {
        CodeSpec spec = CodeSpec::repetition(f, 3, 2);
        spec.init = std::vector<uint8_t>{1, 0, 1};
        Circuit c = build_repetition(spec);
        auto ref = reference_run(c, 11);
        auto errors = enumerate_single_errors(c);
        ASSERT_FALSE(errors.empty());
        for (const auto &e : errors) {
            auto rec = tableau_with_error(c, e.location, e.pauli, 11);
            std::vector<uint32_t> diff;
            for (uint32_t m = 0; m < rec.size(); ++m) {
                if (rec[m] != ref[m]) {
                    diff.push_back(m);
                }
            }
            EXPECT_EQ(diff, e.flipped) << "family " << family_name(f) << " location " << e.location << " pauli "
                                       << int(e.pauli);
        }
    }
}

TEST(frame_simulator, zero_noise_gives_no_flips) {
    Circuit c = build_repetition(CodeSpec::repetition(CodeFamily::RepPhase, 5, 4));
    FrameSimulator sim(c, NoiseModel::zero(), 3);
    SampleBlock block;
    sim.sample(0, 64, block);
    for (uint64_t w : block.flips) {
        EXPECT_EQ(w, 0u);
    }
}

TEST(frame_simulator, deterministic_and_shot_addressable) {
    Circuit c = build_repetition(CodeSpec::repetition(CodeFamily::RepPhase, 5, 4));
    NoiseModel n = NoiseModel::phase_flip_budget();
    FrameSimulator a(c, n, 42), b(c, n, 42);
    SampleBlock x, y, z;
    a.sample(128, 64, x);
    b.sample(128, 64, y);
    EXPECT_EQ(x.flips, y.flips);
    // Shot 130 regenerated alone matches its lane in the block.
    b.sample(130, 1, z);
    for (size_t m = 0; m < z.flips.size(); ++m) {
        EXPECT_EQ(z.flips[m] & 1, (x.flips[m] >> 2) & 1);
    }
}

TEST(frame_simulator, measurement_flip_rate) {
    // With only readout noise, each stabilizer record bit flips with p_M.
    Circuit c = build_repetition(CodeSpec::repetition(CodeFamily::RepBit, 3, 10));
    NoiseModel n = NoiseModel::from_rates(0, 0, 0.1, 0, 0, 0);
    FrameSimulator sim(c, n, 5);
    SampleBlock block;
    size_t ones = 0, total = 0;
    for (uint64_t s = 0; s < 64 * 200; s += 64) {
        sim.sample(s, 64, block);
        for (uint64_t w : block.flips) {
            ones += std::popcount(w);
            total += 64;
        }
    }
    double rate = double(ones) / total;
    EXPECT_NEAR(rate, 0.1, 4 * std::sqrt(0.09 / total));
}

TEST(frame_simulator, envelope_couples_rates) {
    // Error sets at a smaller rate are subsets of those at a larger rate when
    // both runs share an envelope.
    Circuit c = build_repetition(CodeSpec::repetition(CodeFamily::RepBit, 3, 5));
    NoiseModel lo = NoiseModel::from_rates(0, 0, 0.02, 0, 0, 0);
    NoiseModel hi = NoiseModel::from_rates(0, 0, 0.05, 0, 0, 0);
    FrameSimulator a(c, lo, 8), b(c, hi, 8);
    std::array<double, kNumComponents> env{0, 0, 0.05, 0, 0, 0};
    a.set_envelope(env);
    b.set_envelope(env);
    SampleBlock x, y;
    size_t extra = 0;
    for (uint64_t s = 0; s < 64 * 50; s += 64) {
        a.sample(s, 64, x);
        b.sample(s, 64, y);
        for (size_t m = 0; m < x.flips.size(); ++m) {
            EXPECT_EQ(x.flips[m] & ~y.flips[m], 0u);
            extra += std::popcount(y.flips[m] & ~x.flips[m]);
        }
    }
    EXPECT_GT(extra, 0u);
}

TEST(frame_simulator, joint_channel_injects_group) {
    Circuit c = build_repetition(CodeSpec::repetition(CodeFamily::RepBit, 5, 3));
    NoiseModel n;
    CorrelatedChannel ch;
    ch.kind = CorrelatedChannel::Kind::PairFlip;
    ch.measure_a = 0;
    ch.measure_b = 3;
    ch.probability = 0.5;
    n.correlated = {ch};
    auto joint = compile_channels(CodeSpec::repetition(CodeFamily::RepBit, 5, 3), c, n);
    ASSERT_EQ(joint.size(), 1u);
    ASSERT_EQ(joint[0].rounds.size(), 2u);
    EXPECT_EQ(joint[0].rounds[0].size(), 3u);
    FrameSimulator sim(c, n, 2, joint);
    SampleBlock block;
    sim.sample(0, 64, block);
    // Readouts of stabilizers 0 and 3 flip together from the hit round on.
    size_t any = 0;
    for (uint32_t t = 0; t < 3; ++t) {
        EXPECT_EQ(block.flips[4 * t + 0], block.flips[4 * t + 3]);
        EXPECT_EQ(block.flips[4 * t + 1], 0u);
        EXPECT_EQ(block.flips[4 * t + 2], 0u);
        any += std::popcount(block.flips[4 * t]);
    }
    EXPECT_GT(any, 0u);
}

TEST(frame_simulator, joint_channel_rejects_bad_location) {
    Circuit c = build_repetition(CodeSpec::repetition(CodeFamily::RepBit, 3, 2));
    JointChannel j;
    j.probability = 0.1;
    j.rounds = {{{100000, kPauliX}}};
    EXPECT_THROW(FrameSimulator(c, NoiseModel::zero(), 1, std::vector<JointChannel>{j}), ValidationError);
}

TEST(frame_simulator, burst_marks_lanes) {
    Circuit c = build_repetition(CodeSpec::repetition(CodeFamily::RepBit, 3, 2));
    NoiseModel n = NoiseModel::from_rates(1e-3, 0, 0, 0, 0, 0);
    n.bursts = BurstConfig{0.05, 20, 30};
    FrameSimulator sim(c, n, 17);
    size_t flagged = 0, total = 0;
    SampleBlock block;
    for (uint64_t s = 0; s < 64 * 300; s += 64) {
        sim.sample(s, 64, block);
        flagged += std::popcount(block.burst);
        total += 64;
    }
    double frac = double(flagged) / total;
    EXPECT_GT(frac, 0.02);
    EXPECT_LT(frac, 0.1);
}

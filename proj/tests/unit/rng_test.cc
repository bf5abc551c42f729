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

#include "repstab/rng.h"

#include <gtest/gtest.h>

#include <cmath>

using namespace repstab;

TEST(philox, known_answer_zero_key) {
    // Random123 reference vector for Philox4x32-10, key and counter all zero.
    Philox4x32 rng(0);
    auto b = rng(0, 0);
    EXPECT_EQ(b[0], 0x6627e8d5u);
    EXPECT_EQ(b[1], 0xe169c58du);
    EXPECT_EQ(b[2], 0xbc57ac4cu);
    EXPECT_EQ(b[3], 0x9b00dbd8u);
}

TEST(philox, streams_are_independent_of_order) {
    Philox4x32 rng(1234);
    auto a = rng(7, 3);
    auto first = rng(0, 0);
    auto b = rng(7, 3);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, first);
}

TEST(philox, uniform_moments) {
    Philox4x32 rng(99);
    double sum = 0, sum2 = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        double u = rng.uniform(5, i);
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
        sum2 += u * u;
    }
    EXPECT_NEAR(sum / n, 0.5, 5 * std::sqrt(1.0 / 12 / n));
    EXPECT_NEAR(sum2 / n - (sum / n) * (sum / n), 1.0 / 12, 2e-3);
}

TEST(philox, scale_to_range) {
    EXPECT_EQ(scale_to(0, 15), 0u);
    EXPECT_EQ(scale_to(0xFFFFFFFFu, 15), 14u);
    EXPECT_EQ(scale_to(0x80000000u, 2), 1u);
}

TEST(philox, derive_seed_spreads) {
    EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
    EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
    EXPECT_EQ(derive_seed(5, 9), derive_seed(5, 9));
}

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

#ifndef REPSTAB_RNG_H
#define REPSTAB_RNG_H

#include <array>
#include <cstdint>

namespace repstab {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
///
/// Every output block is a pure function of (key, counter), so any shot can be
/// regenerated from (seed, shot index, draw index) alone and shots can be
/// sampled in any order or in parallel.
class Philox4x32 {
   public:
    using Block = std::array<uint32_t, 4>;

    explicit constexpr Philox4x32(uint64_t seed)
        : key_{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)} {}

    constexpr Block operator()(uint64_t stream, uint64_t counter) const {
        Block ctr{static_cast<uint32_t>(counter), static_cast<uint32_t>(counter >> 32),
                  static_cast<uint32_t>(stream), static_cast<uint32_t>(stream >> 32)};
        uint32_t k0 = key_[0];
        uint32_t k1 = key_[1];
        for (int round = 0; round < 10; ++round) {
            uint64_t p0 = uint64_t{kMul0} * ctr[0];
            uint64_t p1 = uint64_t{kMul1} * ctr[2];
            ctr = {static_cast<uint32_t>(p1 >> 32) ^ ctr[1] ^ k0, static_cast<uint32_t>(p1),
                   static_cast<uint32_t>(p0 >> 32) ^ ctr[3] ^ k1, static_cast<uint32_t>(p0)};
            k0 += kWeyl0;
            k1 += kWeyl1;
        }
        return ctr;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform(uint64_t stream, uint64_t counter) const {
        Block b = (*this)(stream, counter);
        uint64_t bits = (uint64_t{b[0]} << 32 | b[1]) >> 11;
        return static_cast<double>(bits) * 0x1.0p-53;
    }

   private:
    static constexpr uint32_t kMul0 = 0xD2511F53u;
    static constexpr uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr uint32_t kWeyl1 = 0xBB67AE85u;
    std::array<uint32_t, 2> key_;
};

/// Maps a 32-bit word onto [0, n) without modulo bias beyond 2^-32.
inline uint32_t scale_to(uint32_t word, uint32_t n) {
    return static_cast<uint32_t>((uint64_t{word} * n) >> 32);
}

/// Splits one seed into independent sub-seeds (SplitMix64 finalizer).
constexpr uint64_t derive_seed(uint64_t seed, uint64_t salt) {
    uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace repstab

#endif

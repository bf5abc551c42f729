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

#ifndef REPSTAB_TABLEAU_H
#define REPSTAB_TABLEAU_H

#include <cstdint>
#include <vector>

#include "repstab/circuit.h"
#include "repstab/rng.h"

namespace repstab {

/// Stabilizer state in destabilizer/stabilizer form (Aaronson-Gottesman).
///
/// Rows 0..n-1 are destabilizers, n..2n-1 stabilizers. Starts in |0...0>.
class Tableau {
   public:
    explicit Tableau(size_t n);

    size_t num_qubits() const { return n_; }

    void h(size_t q);
    void cz(size_t a, size_t b);
    void x(size_t q);
    void z(size_t q);
    /// Z-basis measurement; `coin` decides the outcome when it is random.
    bool measure(size_t q, bool coin);
    /// True when a Z measurement of q would be deterministic.
    bool is_deterministic(size_t q) const;
    void reset(size_t q, bool coin);

   private:
    bool xb(size_t row, size_t q) const { return (x_[row * words_ + q / 64] >> (q % 64)) & 1; }
    bool zb(size_t row, size_t q) const { return (z_[row * words_ + q / 64] >> (q % 64)) & 1; }
    void rowsum(size_t h, size_t i);
    void rowcopy(size_t dst, size_t src);

    size_t n_;
    size_t words_;
    // One extra scratch row at index 2n.
    std::vector<uint64_t> x_;
    std::vector<uint64_t> z_;
    std::vector<uint8_t> r_;
};

/// Noiseless measurement record of `circuit` in schedule order.
///
/// Outcomes that are random in the ideal circuit are decided by coins drawn
/// from `seed`, so the record is a deterministic function of (circuit, seed).
std::vector<uint8_t> reference_run(const Circuit &circuit, uint64_t seed);

}  // namespace repstab

#endif

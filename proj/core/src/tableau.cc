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

#include "repstab/tableau.h"

#include <bit>

namespace repstab {

Tableau::Tableau(size_t n)
    : n_(n), words_((n + 63) / 64), x_((2 * n + 1) * words_), z_((2 * n + 1) * words_), r_(2 * n + 1) {
    for (size_t i = 0; i < n; ++i) {
        x_[i * words_ + i / 64] |= uint64_t{1} << (i % 64);
        z_[(i + n) * words_ + i / 64] |= uint64_t{1} << (i % 64);
    }
}

void Tableau::h(size_t q) {
    size_t w = q / 64;
    uint64_t m = uint64_t{1} << (q % 64);
    for (size_t row = 0; row < 2 * n_; ++row) {
        uint64_t &xw = x_[row * words_ + w];
        uint64_t &zw = z_[row * words_ + w];
        bool xv = xw & m;
        bool zv = zw & m;
        r_[row] ^= xv && zv;
        if (xv != zv) {
            xw ^= m;
            zw ^= m;
        }
    }
}

void Tableau::cz(size_t a, size_t b) {
    for (size_t row = 0; row < 2 * n_; ++row) {
        bool xa = xb(row, a), xbv = xb(row, b);
        bool za = zb(row, a), zbv = zb(row, b);
        r_[row] ^= xa && xbv && (za != zbv);
        if (xbv) {
            z_[row * words_ + a / 64] ^= uint64_t{1} << (a % 64);
        }
        if (xa) {
            z_[row * words_ + b / 64] ^= uint64_t{1} << (b % 64);
        }
    }
}

void Tableau::x(size_t q) {
    for (size_t row = 0; row < 2 * n_; ++row) {
        r_[row] ^= zb(row, q);
    }
}

void Tableau::z(size_t q) {
    for (size_t row = 0; row < 2 * n_; ++row) {
        r_[row] ^= xb(row, q);
    }
}

namespace {

// Exponent of i picked up when multiplying single-qubit Paulis (x1,z1)*(x2,z2).
int g_phase(bool x1, bool z1, bool x2, bool z2) {
    if (!x1 && !z1) {
        return 0;
    }
    if (x1 && z1) {
        return static_cast<int>(z2) - static_cast<int>(x2);
    }
    if (x1) {
        return static_cast<int>(z2) * (2 * static_cast<int>(x2) - 1);
    }
    return static_cast<int>(x2) * (1 - 2 * static_cast<int>(z2));
}

}  // namespace

void Tableau::rowsum(size_t h, size_t i) {
    int sum = 2 * r_[h] + 2 * r_[i];
    for (size_t q = 0; q < n_; ++q) {
        sum += g_phase(xb(i, q), zb(i, q), xb(h, q), zb(h, q));
    }
    sum = ((sum % 4) + 4) % 4;
    r_[h] = sum == 2;
    for (size_t w = 0; w < words_; ++w) {
        x_[h * words_ + w] ^= x_[i * words_ + w];
        z_[h * words_ + w] ^= z_[i * words_ + w];
    }
}

void Tableau::rowcopy(size_t dst, size_t src) {
    for (size_t w = 0; w < words_; ++w) {
        x_[dst * words_ + w] = x_[src * words_ + w];
        z_[dst * words_ + w] = z_[src * words_ + w];
    }
    r_[dst] = r_[src];
}

bool Tableau::is_deterministic(size_t q) const {
    for (size_t p = n_; p < 2 * n_; ++p) {
        if (xb(p, q)) {
            return false;
        }
    }
    return true;
}

bool Tableau::measure(size_t q, bool coin) {
    size_t p = 2 * n_;
    for (size_t row = n_; row < 2 * n_; ++row) {
        if (xb(row, q)) {
            p = row;
            break;
        }
    }
    if (p < 2 * n_) {
        for (size_t row = 0; row < 2 * n_; ++row) {
            if (row != p && xb(row, q)) {
                rowsum(row, p);
            }
        }
        rowcopy(p - n_, p);
        for (size_t w = 0; w < words_; ++w) {
            x_[p * words_ + w] = 0;
            z_[p * words_ + w] = 0;
        }
        z_[p * words_ + q / 64] = uint64_t{1} << (q % 64);
        r_[p] = coin;
        return coin;
    }
    size_t scratch = 2 * n_;
    for (size_t w = 0; w < words_; ++w) {
        x_[scratch * words_ + w] = 0;
        z_[scratch * words_ + w] = 0;
    }
    r_[scratch] = 0;
    for (size_t row = 0; row < n_; ++row) {
        if (xb(row, q)) {
            rowsum(scratch, row + n_);
        }
    }
    return r_[scratch];
}

void Tableau::reset(size_t q, bool coin) {
    if (measure(q, coin)) {
        x(q);
    }
}

std::vector<uint8_t> reference_run(const Circuit &circuit, uint64_t seed) {
    circuit.validate();
    Philox4x32 rng(seed);
    uint64_t coin_counter = 0;
    auto coin = [&]() { return static_cast<bool>(rng(0, coin_counter++)[0] & 1); };
    Tableau t(circuit.qubit_count);
    std::vector<uint8_t> record;
    record.reserve(circuit.measurement_count());
    for (const Moment &moment : circuit.moments) {
        for (const Op &op : moment.ops) {
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
                    record.push_back(t.measure(op.q0, coin()));
                    break;
                case OpKind::R:
                    t.reset(op.q0, coin());
                    break;
                case OpKind::Idle:
                    break;
            }
        }
    }
    return record;
}

}  // namespace repstab

// Copyright 2026 The qeclab Authors
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

#ifndef QECLAB_TABLEAU_H
#define QECLAB_TABLEAU_H

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qeclab/rng.hpp"

namespace qeclab {

// A Hermitian Pauli operator over n qubits, bit-packed: x word bits mark X/Y
// support, z word bits mark Z/Y support. sign is the +/- prefix.
struct PauliRow {
    std::vector<uint64_t> x, z;
    bool sign = false;

    explicit PauliRow(size_t words) : x(words, 0), z(words, 0) {
    }

    bool x_bit(int q) const {
        return (x[q >> 6] >> (q & 63)) & 1;
    }
    bool z_bit(int q) const {
        return (z[q >> 6] >> (q & 63)) & 1;
    }
    void set_x(int q, bool v) {
        uint64_t m = 1ull << (q & 63);
        x[q >> 6] = v ? (x[q >> 6] | m) : (x[q >> 6] & ~m);
    }
    void set_z(int q, bool v) {
        uint64_t m = 1ull << (q & 63);
        z[q >> 6] = v ? (z[q >> 6] | m) : (z[q >> 6] & ~m);
    }

    bool is_identity() const {
        for (size_t w = 0; w < x.size(); w++) {
            if (x[w] | z[w]) {
                return false;
            }
        }
        return true;
    }

    bool commutes_with(const PauliRow &other) const {
        int parity = 0;
        for (size_t w = 0; w < x.size(); w++) {
            parity ^= std::popcount(x[w] & other.z[w]) & 1;
            parity ^= std::popcount(z[w] & other.x[w]) & 1;
        }
        return parity == 0;
    }

    // this := this * other, with exact sign tracking. The product of two
    // commuting Hermitian Paulis is Hermitian; callers only multiply rows of
    // an abelian group so the accumulated i-power is always even.
    void multiply_by(const PauliRow &other) {
        int k = 0;  // i-power mod 4
        for (size_t w = 0; w < x.size(); w++) {
            uint64_t a = x[w], b = z[w], c = other.x[w], d = other.z[w];
            uint64_t plus = (a & b & ~c & d) | (a & ~b & c & d) | (~a & b & c & ~d);
            uint64_t minus = (a & b & c & ~d) | (a & ~b & ~c & d) | (~a & b & c & d);
            k += std::popcount(plus) - std::popcount(minus);
            x[w] ^= c;
            z[w] ^= d;
        }
        k &= 3;
        if (k & 1) {
            throw std::logic_error("product of anticommuting Pauli rows");
        }
        sign ^= other.sign ^ (k == 2);
    }
};

// Stabilizer state over a fixed index space of n devices, represented by m
// mutually commuting Hermitian generators. Devices outside the computational
// subspace own no generator; the simulator removes and re-adds rows as
// devices leak and return, keeping m equal to the computational device count.
class StabilizerTableau {
  public:
    explicit StabilizerTableau(int num_qubits)
        : n_(num_qubits), words_((num_qubits + 63) / 64) {
        rows_.reserve(n_);
        for (int q = 0; q < n_; q++) {
            append_z_row(q, false);
        }
    }

    int num_qubits() const {
        return n_;
    }
    int num_rows() const {
        return static_cast<int>(rows_.size());
    }
    const PauliRow &row(int i) const {
        return rows_[i];
    }

    void h(int q) {
        for (auto &r : rows_) {
            bool xb = r.x_bit(q), zb = r.z_bit(q);
            r.sign ^= xb && zb;
            r.set_x(q, zb);
            r.set_z(q, xb);
        }
    }

    void x(int q) {
        for (auto &r : rows_) {
            r.sign ^= r.z_bit(q);
        }
    }

    void z(int q) {
        for (auto &r : rows_) {
            r.sign ^= r.x_bit(q);
        }
    }

    void cz(int a, int b) {
        for (auto &r : rows_) {
            bool xa = r.x_bit(a), za = r.z_bit(a);
            bool xb = r.x_bit(b), zb = r.z_bit(b);
            r.sign ^= xa && xb && (za != zb);
            r.set_z(a, za ^ xb);
            r.set_z(b, zb ^ xa);
        }
    }

    // Measures qubit q in the computational basis. Sets *deterministic when
    // the caller wants to know whether the outcome was forced.
    bool measure(int q, CounterRng &rng, bool *deterministic = nullptr) {
        int p = first_anticommuting_row(q);
        if (p >= 0) {
            collapse_onto(p, q);
            bool outcome = rng.next_bool();
            rows_[p] = z_row(q, outcome);
            if (deterministic) {
                *deterministic = false;
            }
            return outcome;
        }
        if (deterministic) {
            *deterministic = true;
        }
        return deterministic_z_sign(q);
    }

    void reset(int q, CounterRng &rng) {
        bool v = measure(q, rng);
        if (v) {
            x(q);
        }
    }

    // Applies a Pauli error: flips the sign of every generator that
    // anticommutes with it.
    void apply_pauli(const PauliRow &e) {
        for (auto &r : rows_) {
            if (!r.commutes_with(e)) {
                r.sign ^= 1;
            }
        }
    }

    // Removes device q from the tableau (transition out of the computational
    // subspace). If q was entangled, the partner generator keeps its support
    // with a coin-flip sign, sampling from the dephased mixture.
    void trace_out(int q, CounterRng &rng) {
        int p1 = first_anticommuting_row(q);
        if (p1 >= 0) {
            collapse_onto(p1, q);
        }
        int p2 = -1;
        for (int i = 0; i < num_rows(); i++) {
            if (i != p1 && (rows_[i].x_bit(q) || rows_[i].z_bit(q))) {
                if (p2 < 0) {
                    p2 = i;
                } else {
                    rows_[i].multiply_by(rows_[p2]);
                }
            }
        }
        if (p1 >= 0 && p2 >= 0) {
            drop_row(p1);
            if (p2 == num_rows()) {
                p2 = p1;  // p2 occupied the swapped-in slot
            }
            rows_[p2].set_z(q, false);
            rows_[p2].sign ^= rng.next_bool();
        } else if (p1 >= 0) {
            drop_row(p1);
        } else if (p2 >= 0) {
            drop_row(p2);
        } else {
            throw std::logic_error("trace_out: device has no generator support");
        }
    }

    // Re-adds device q in |0> or |1> (transition back into the computational
    // subspace, or reset of a leaked device).
    void append_z_row(int q, bool sign) {
        PauliRow r(words_);
        r.set_z(q, true);
        r.sign = sign;
        rows_.push_back(std::move(r));
    }

    size_t words() const {
        return words_;
    }

  private:
    int first_anticommuting_row(int q) const {
        for (int i = 0; i < num_rows(); i++) {
            if (rows_[i].x_bit(q)) {
                return i;
            }
        }
        return -1;
    }

    // Multiplies row p into every other row with an X/Y at q, leaving p the
    // only generator anticommuting with Z_q.
    void collapse_onto(int p, int q) {
        for (int i = 0; i < num_rows(); i++) {
            if (i != p && rows_[i].x_bit(q)) {
                rows_[i].multiply_by(rows_[p]);
            }
        }
    }

    PauliRow z_row(int q, bool sign) const {
        PauliRow r(words_);
        r.set_z(q, true);
        r.sign = sign;
        return r;
    }

    void drop_row(int i) {
        rows_[i] = rows_.back();
        rows_.pop_back();
    }

    // Determines the sign of Z_q when it belongs to the stabilizer group:
    // Gaussian elimination over the X halves first (to cancel nothing, X
    // parts are all absent at q), then over Z bits.
    bool deterministic_z_sign(int q) const {
        std::vector<PauliRow> work = rows_;
        PauliRow target(words_);
        target.set_z(q, true);
        size_t pivot_row = 0;
        for (int col = 0; col < n_ && pivot_row < work.size(); col++) {
            for (int half = 0; half < 2; half++) {
                bool use_x = half == 0;
                size_t found = pivot_row;
                while (found < work.size() &&
                       !(use_x ? work[found].x_bit(col) : work[found].z_bit(col))) {
                    found++;
                }
                if (found == work.size()) {
                    continue;
                }
                std::swap(work[pivot_row], work[found]);
                for (size_t i = 0; i < work.size(); i++) {
                    if (i != pivot_row &&
                        (use_x ? work[i].x_bit(col) : work[i].z_bit(col))) {
                        work[i].multiply_by(work[pivot_row]);
                    }
                }
                if (use_x ? target.x_bit(col) : target.z_bit(col)) {
                    target.multiply_by(work[pivot_row]);
                }
                pivot_row++;
                if (pivot_row >= work.size()) {
                    break;
                }
            }
        }
        if (!target.is_identity()) {
            throw std::logic_error("measurement outcome neither random nor determined");
        }
        return target.sign;
    }

    int n_;
    size_t words_;
    std::vector<PauliRow> rows_;
};

}  // namespace qeclab

#endif

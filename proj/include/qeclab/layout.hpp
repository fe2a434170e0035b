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

#ifndef QECLAB_LAYOUT_H
#define QECLAB_LAYOUT_H

#include <algorithm>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qeclab {

// Qubits live on a rotated (row, col) grid. Data qubits sit at even row+col
// parity, measure qubits at odd parity, and adjacency is unit Manhattan
// distance. A distance-d surface patch is the diamond of data qubits within
// Manhattan distance d-1 of the centre (d, d).
struct QubitCoord {
    int16_t row = 0;
    int16_t col = 0;

    bool operator==(const QubitCoord &other) const = default;
    bool operator<(const QubitCoord &other) const {
        return row != other.row ? row < other.row : col < other.col;
    }
};

inline std::string coord_str(QubitCoord q) {
    return std::to_string(q.row) + "," + std::to_string(q.col);
}

enum class Basis : uint8_t { kX, kZ };

inline char basis_char(Basis b) {
    return b == Basis::kX ? 'X' : 'Z';
}

enum class CodeKind : uint8_t { kSurface, kRepetition };

// One stabilizer: its measure qubit, label (traditional surface-code
// convention), lex-sorted data support, and the CZ layer each support qubit
// is coupled in. Layers 0 and 3 couple in the Z basis, layers 1 and 2 in X,
// so every stabilizer measures a ZXXZ-type parity.
struct Stabilizer {
    QubitCoord measure_qubit;
    Basis basis = Basis::kZ;
    std::vector<QubitCoord> support;
    // cz layer -> index into support, -1 when this stabilizer skips the layer.
    std::array<int8_t, 4> layer_to_support{-1, -1, -1, -1};

    int weight() const {
        return static_cast<int>(support.size());
    }

    // The Pauli letter this stabilizer applies to support qubit i.
    Basis leg_basis(size_t i) const {
        for (int layer = 0; layer < 4; layer++) {
            if (layer_to_support[layer] == static_cast<int8_t>(i)) {
                return (layer == 1 || layer == 2) ? Basis::kX : Basis::kZ;
            }
        }
        throw std::logic_error("support qubit missing from cz layer map");
    }
};

struct CodeLayout {
    CodeKind kind = CodeKind::kSurface;
    int distance = 0;
    std::vector<QubitCoord> data_qubits;  // lex sorted
    std::vector<Stabilizer> stabilizers;  // sorted by measure qubit
    std::vector<QubitCoord> logical_z_support;
    std::vector<QubitCoord> logical_x_support;

    int num_data() const {
        return static_cast<int>(data_qubits.size());
    }
    int num_measure() const {
        return static_cast<int>(stabilizers.size());
    }

    bool is_data(QubitCoord q) const {
        return std::binary_search(data_qubits.begin(), data_qubits.end(), q);
    }

    int data_index(QubitCoord q) const {
        auto it = std::lower_bound(data_qubits.begin(), data_qubits.end(), q);
        if (it == data_qubits.end() || !(*it == q)) {
            throw std::invalid_argument("not a data qubit: " + coord_str(q));
        }
        return static_cast<int>(it - data_qubits.begin());
    }

    // All qubits, data first then measure, each group lex sorted.
    std::vector<QubitCoord> all_qubits() const {
        std::vector<QubitCoord> qs = data_qubits;
        for (const auto &s : stabilizers) {
            qs.push_back(s.measure_qubit);
        }
        return qs;
    }
};

namespace detail {

inline std::array<QubitCoord, 4> neighbors(QubitCoord q) {
    return {QubitCoord{static_cast<int16_t>(q.row - 1), q.col},
            QubitCoord{static_cast<int16_t>(q.row + 1), q.col},
            QubitCoord{q.row, static_cast<int16_t>(q.col - 1)},
            QubitCoord{q.row, static_cast<int16_t>(q.col + 1)}};
}

// Assigns CZ layers to a surface-code stabilizer. X-type stabilizers sweep
// (E, S, N, W), Z-type (E, N, S, W); both couple Z legs in the outer layers
// and X legs in the middle ones. The opposed vertical order keeps the four
// layers conflict-free, and it leaves each type's post-midpoint legs paired
// perpendicular to the logical operator its hook errors threaten: a fault
// on the measure qubit after the second CZ never advances a logical chain
// by more than a single step.
inline void assign_cz_layers(Stabilizer &s) {
    const QubitCoord m = s.measure_qubit;
    auto dir_of = [&](QubitCoord q) -> char {
        if (q.row == m.row - 1) return 'N';
        if (q.row == m.row + 1) return 'S';
        if (q.col == m.col - 1) return 'W';
        return 'E';
    };
    const char *order = s.basis == Basis::kX ? "ESNW" : "ENSW";
    s.layer_to_support = {-1, -1, -1, -1};
    for (size_t i = 0; i < s.support.size(); i++) {
        char d = dir_of(s.support[i]);
        for (int layer = 0; layer < 4; layer++) {
            if (order[layer] == d) {
                s.layer_to_support[layer] = static_cast<int8_t>(i);
            }
        }
    }
}

inline CodeLayout translated(const CodeLayout &base, int16_t dr, int16_t dc) {
    CodeLayout out = base;
    auto shift = [&](QubitCoord &q) {
        q.row = static_cast<int16_t>(q.row + dr);
        q.col = static_cast<int16_t>(q.col + dc);
    };
    for (auto &q : out.data_qubits) shift(q);
    for (auto &s : out.stabilizers) {
        shift(s.measure_qubit);
        for (auto &q : s.support) shift(q);
    }
    for (auto &q : out.logical_z_support) shift(q);
    for (auto &q : out.logical_x_support) shift(q);
    return out;
}

}  // namespace detail

/// Builds the rotated surface code of odd distance d: d^2 data qubits,
/// d^2-1 measure qubits, 2(d-1) weight-2 boundary stabilizers. Logical Z
/// runs along the upper-left diamond edge, logical X along the lower-left
/// edge; they intersect at the lower-left data qubit.
inline CodeLayout surface_layout(int d) {
    if (d < 1 || d % 2 == 0) {
        throw std::invalid_argument("surface code distance must be odd and >= 1");
    }
    CodeLayout layout;
    layout.kind = CodeKind::kSurface;
    layout.distance = d;

    const int cr = d, cc = d;
    auto dist = [&](int r, int c) { return std::abs(r - cr) + std::abs(c - cc); };

    for (int r = cr - (d - 1); r <= cr + (d - 1); r++) {
        for (int c = cc - (d - 1); c <= cc + (d - 1); c++) {
            if ((r + c) % 2 == 0 && dist(r, c) <= d - 1) {
                layout.data_qubits.push_back({static_cast<int16_t>(r), static_cast<int16_t>(c)});
            }
        }
    }
    std::sort(layout.data_qubits.begin(), layout.data_qubits.end());

    for (int r = cr - d; r <= cr + d; r++) {
        for (int c = cc - d; c <= cc + d; c++) {
            if ((r + c) % 2 == 0 || dist(r, c) > d) {
                continue;
            }
            QubitCoord m{static_cast<int16_t>(r), static_cast<int16_t>(c)};
            std::vector<QubitCoord> support;
            for (QubitCoord q : detail::neighbors(m)) {
                if (layout.is_data(q)) {
                    support.push_back(q);
                }
            }
            std::sort(support.begin(), support.end());
            if (support.size() == 2) {
                // Boundary site. Keep X-type cuts on the diamond edges the
                // logical Z traverses and Z-type cuts on the other two, which
                // fixes logical Z top-to-bottom and logical X left-to-right.
                bool anti_diagonal = support[1].col < support[0].col;
                bool x_type = r % 2 != 0;
                if (anti_diagonal != x_type) {
                    continue;
                }
            } else if (support.size() != 4) {
                continue;
            }
            Stabilizer s;
            s.measure_qubit = m;
            s.basis = (r % 2 != 0) ? Basis::kX : Basis::kZ;
            s.support = std::move(support);
            detail::assign_cz_layers(s);
            layout.stabilizers.push_back(std::move(s));
        }
    }
    std::sort(layout.stabilizers.begin(), layout.stabilizers.end(),
              [](const Stabilizer &a, const Stabilizer &b) { return a.measure_qubit < b.measure_qubit; });

    for (int k = 1; k <= d; k++) {
        layout.logical_z_support.push_back(
            {static_cast<int16_t>(k), static_cast<int16_t>(d + 1 - k)});
        layout.logical_x_support.push_back(
            {static_cast<int16_t>(d - 1 + k), static_cast<int16_t>(k)});
    }
    std::sort(layout.logical_z_support.begin(), layout.logical_z_support.end());
    std::sort(layout.logical_x_support.begin(), layout.logical_x_support.end());
    return layout;
}

/// The four distance-3 sub-codes covering the quadrants of a distance-5
/// layout, in order upper-left, upper-right, lower-left, lower-right. Every
/// qubit of every quadrant is a qubit of the parent layout, and the centre
/// data qubit belongs to all four.
inline std::vector<CodeLayout> quadrant_layouts(const CodeLayout &d5) {
    if (d5.kind != CodeKind::kSurface || d5.distance != 5) {
        throw std::invalid_argument("quadrant_layouts requires a distance-5 surface layout");
    }
    CodeLayout base = surface_layout(3);
    return {
        detail::translated(base, 0, 2),  // upper-left
        detail::translated(base, 2, 4),  // upper-right
        detail::translated(base, 2, 0),  // lower-left
        detail::translated(base, 4, 2),  // lower-right
    };
}

/// A 1-D chain of d data qubits interleaved with d-1 weight-2 Z stabilizers.
inline CodeLayout repetition_layout(int d) {
    if (d < 2) {
        throw std::invalid_argument("repetition code distance must be >= 2");
    }
    CodeLayout layout;
    layout.kind = CodeKind::kRepetition;
    layout.distance = d;
    for (int k = 0; k < d; k++) {
        layout.data_qubits.push_back({1, static_cast<int16_t>(2 * k + 1)});
    }
    for (int k = 0; k < d - 1; k++) {
        Stabilizer s;
        s.measure_qubit = {1, static_cast<int16_t>(2 * k + 2)};
        s.basis = Basis::kZ;
        s.support = {layout.data_qubits[k], layout.data_qubits[k + 1]};
        // Both legs couple in Z-role layers: east neighbour in layer 0,
        // west neighbour in layer 3, matching the surface-code sweep.
        s.layer_to_support = {1, -1, -1, 0};
        layout.stabilizers.push_back(std::move(s));
    }
    layout.logical_z_support = {layout.data_qubits[0]};
    layout.logical_x_support = layout.data_qubits;
    return layout;
}

/// Number of detectors in a basis-B memory experiment: stabilizers matching
/// the memory basis contribute rounds+1 detectors, the others rounds-1.
inline int detector_count(const CodeLayout &layout, Basis basis, int rounds) {
    if (rounds < 1) {
        throw std::invalid_argument("rounds must be >= 1");
    }
    if (layout.kind == CodeKind::kRepetition && basis != Basis::kZ) {
        throw std::invalid_argument("repetition code memory runs in the Z basis only");
    }
    int n_same = 0, n_other = 0;
    for (const auto &s : layout.stabilizers) {
        (s.basis == basis ? n_same : n_other)++;
    }
    return n_same * (rounds + 1) + n_other * (rounds - 1);
}

}  // namespace qeclab

#endif

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

#include "qeclab/layout.hpp"

#include <set>

#include "gtest/gtest.h"

using namespace qeclab;

TEST(Layout, SurfaceQubitCounts) {
    auto d5 = surface_layout(5);
    EXPECT_EQ(d5.num_data(), 25);
    EXPECT_EQ(d5.num_measure(), 24);

    auto d3 = surface_layout(3);
    EXPECT_EQ(d3.num_data(), 9);
    EXPECT_EQ(d3.num_measure(), 8);

    auto d1 = surface_layout(1);
    EXPECT_EQ(d1.num_data(), 1);
    EXPECT_EQ(d1.num_measure(), 0);

    EXPECT_THROW(surface_layout(4), std::invalid_argument);
    EXPECT_THROW(surface_layout(0), std::invalid_argument);
    EXPECT_THROW(surface_layout(-3), std::invalid_argument);
}

TEST(Layout, WeightCensus) {
    for (int d : {3, 5, 7}) {
        auto layout = surface_layout(d);
        int w2 = 0, w4 = 0, total_weight = 0;
        for (const auto &s : layout.stabilizers) {
            total_weight += s.weight();
            if (s.weight() == 2) {
                w2++;
            } else if (s.weight() == 4) {
                w4++;
            } else {
                FAIL() << "unexpected stabilizer weight " << s.weight();
            }
        }
        EXPECT_EQ(w2, 2 * (d - 1));
        EXPECT_EQ(w4, layout.num_measure() - 2 * (d - 1));
        if (d == 5) {
            // 80 CZ interactions per cycle on the 49-qubit patch.
            EXPECT_EQ(total_weight, 80);
        }
    }
}

TEST(Layout, StabilizerGeometry) {
    for (int d : {3, 5, 7}) {
        auto layout = surface_layout(d);
        std::set<QubitCoord> data(layout.data_qubits.begin(), layout.data_qubits.end());
        std::set<QubitCoord> measure;
        for (const auto &s : layout.stabilizers) {
            EXPECT_FALSE(data.count(s.measure_qubit));
            EXPECT_TRUE(measure.insert(s.measure_qubit).second);
            std::set<int8_t> layers;
            for (int layer = 0; layer < 4; layer++) {
                int8_t sup = s.layer_to_support[layer];
                if (sup >= 0) {
                    EXPECT_TRUE(layers.insert(sup).second);
                }
            }
            EXPECT_EQ(layers.size(), s.support.size());
            for (QubitCoord q : s.support) {
                EXPECT_TRUE(data.count(q));
                int manhattan =
                    std::abs(q.row - s.measure_qubit.row) + std::abs(q.col - s.measure_qubit.col);
                EXPECT_EQ(manhattan, 1);
            }
        }
    }
}

// Symplectic commutation: every pair of stabilizer operators must overlap on
// an even number of qubits where their Pauli letters differ.
TEST(Layout, StabilizerCommutation) {
    for (int d : {3, 5, 7}) {
        auto layout = surface_layout(d);
        for (size_t a = 0; a < layout.stabilizers.size(); a++) {
            for (size_t b = a + 1; b < layout.stabilizers.size(); b++) {
                const auto &sa = layout.stabilizers[a];
                const auto &sb = layout.stabilizers[b];
                int anticommuting = 0;
                for (size_t i = 0; i < sa.support.size(); i++) {
                    for (size_t j = 0; j < sb.support.size(); j++) {
                        if (sa.support[i] == sb.support[j] &&
                            sa.leg_basis(i) != sb.leg_basis(j)) {
                            anticommuting++;
                        }
                    }
                }
                EXPECT_EQ(anticommuting % 2, 0)
                    << "stabilizers at " << coord_str(sa.measure_qubit) << " and "
                    << coord_str(sb.measure_qubit) << " anticommute (d=" << d << ")";
            }
        }
    }
}

// Logical operators also written as ZXXZ-gauge mixed operators: a logical-Z
// leg is X wherever the memory-basis conversion applies. At the layout level
// we check the traditional-frame condition: the two logical supports
// intersect in exactly one qubit, and each stabilizer overlaps each logical
// support evenly in the anticommuting basis.
TEST(Layout, LogicalSupports) {
    for (int d : {3, 5, 7}) {
        auto layout = surface_layout(d);
        std::set<QubitCoord> zs(layout.logical_z_support.begin(), layout.logical_z_support.end());
        std::set<QubitCoord> xs(layout.logical_x_support.begin(), layout.logical_x_support.end());
        EXPECT_EQ(zs.size(), static_cast<size_t>(d));
        EXPECT_EQ(xs.size(), static_cast<size_t>(d));
        int common = 0;
        for (QubitCoord q : zs) {
            common += xs.count(q);
        }
        EXPECT_EQ(common, 1);
        for (const auto &s : layout.stabilizers) {
            int z_olap = 0, x_olap = 0;
            for (size_t i = 0; i < s.support.size(); i++) {
                // Traditional labels: an X-type stabilizer is all-X, Z-type all-Z.
                if (s.basis == Basis::kX && zs.count(s.support[i])) {
                    z_olap++;
                }
                if (s.basis == Basis::kZ && xs.count(s.support[i])) {
                    x_olap++;
                }
            }
            EXPECT_EQ(z_olap % 2, 0);
            EXPECT_EQ(x_olap % 2, 0);
        }
    }
}

TEST(Layout, QuadrantsCoverage) {
    auto d5 = surface_layout(5);
    auto quads = quadrant_layouts(d5);
    ASSERT_EQ(quads.size(), 4u);

    std::set<QubitCoord> parent;
    for (QubitCoord q : d5.all_qubits()) {
        parent.insert(q);
    }
    QubitCoord center{5, 5};
    for (const auto &quad : quads) {
        EXPECT_EQ(quad.num_data(), 9);
        EXPECT_EQ(quad.num_measure(), 8);
        for (QubitCoord q : quad.all_qubits()) {
            EXPECT_TRUE(parent.count(q)) << coord_str(q) << " not in the d=5 layout";
        }
        EXPECT_TRUE(quad.is_data(center));
        // Shared coordinates keep their basis coloring.
        for (const auto &s : quad.stabilizers) {
            for (const auto &ps : d5.stabilizers) {
                if (ps.measure_qubit == s.measure_qubit) {
                    EXPECT_EQ(ps.basis, s.basis);
                }
            }
        }
    }
    EXPECT_THROW(quadrant_layouts(surface_layout(3)), std::invalid_argument);
    EXPECT_THROW(quadrant_layouts(repetition_layout(5)), std::invalid_argument);
}

TEST(Layout, Repetition) {
    auto d25 = repetition_layout(25);
    EXPECT_EQ(d25.num_data() + d25.num_measure(), 49);
    auto d3 = repetition_layout(3);
    EXPECT_EQ(d3.num_data() + d3.num_measure(), 5);
    auto d2 = repetition_layout(2);
    EXPECT_EQ(d2.num_data(), 2);
    EXPECT_EQ(d2.num_measure(), 1);
    for (const auto &s : d25.stabilizers) {
        EXPECT_EQ(s.basis, Basis::kZ);
        EXPECT_EQ(s.weight(), 2);
        EXPECT_EQ(s.leg_basis(0), Basis::kZ);
        EXPECT_EQ(s.leg_basis(1), Basis::kZ);
    }
    EXPECT_THROW(repetition_layout(1), std::invalid_argument);
}

TEST(Layout, DetectorCountFormula) {
    EXPECT_EQ(detector_count(surface_layout(5), Basis::kZ, 25), 600);
    EXPECT_EQ(detector_count(surface_layout(3), Basis::kZ, 1), 8);
    EXPECT_EQ(detector_count(repetition_layout(25), Basis::kZ, 50), 1224);
    EXPECT_THROW(detector_count(surface_layout(3), Basis::kZ, 0), std::invalid_argument);
    EXPECT_THROW(detector_count(repetition_layout(3), Basis::kX, 2), std::invalid_argument);
}

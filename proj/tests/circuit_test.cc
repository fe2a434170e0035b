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

#include "qeclab/circuit.hpp"

#include <map>

#include "gtest/gtest.h"
#include "qeclab/layout.hpp"
#include "qeclab/rng.hpp"
#include "qeclab/tableau.hpp"

using namespace qeclab;

namespace {

std::vector<bool> run_noiseless(const Circuit &c, uint64_t seed) {
    StabilizerTableau tab(c.num_qubits());
    CounterRng rng(seed, 0);
    std::vector<bool> records;
    for (const auto &moment : c.moments) {
        for (const auto &ins : moment) {
            switch (ins.kind) {
                case InstructionKind::kPrepZ:
                case InstructionKind::kReset:
                    for (int32_t q : ins.targets) tab.reset(q, rng);
                    break;
                case InstructionKind::kXGate:
                case InstructionKind::kDDX:
                    for (int32_t q : ins.targets) tab.x(q);
                    break;
                case InstructionKind::kHadamard:
                    for (int32_t q : ins.targets) tab.h(q);
                    break;
                case InstructionKind::kCZ:
                    tab.cz(ins.targets[0], ins.targets[1]);
                    break;
                case InstructionKind::kMeasure:
                    for (int32_t q : ins.targets) records.push_back(tab.measure(q, rng));
                    break;
            }
        }
    }
    return records;
}

void expect_noiseless_clean(const Circuit &c, uint64_t seed) {
    std::vector<bool> rec = run_noiseless(c, seed);
    for (const auto &det : c.detectors) {
        bool parity = false;
        for (int32_t r : det.records) {
            parity ^= rec[r];
        }
        EXPECT_EQ(parity, det.reference)
            << "detector (round " << det.id.round << ", stab " << det.id.stabilizer_index
            << ") fired on a noiseless run";
    }
    bool obs = false;
    for (int32_t r : c.observable_records) {
        obs ^= rec[r];
    }
    EXPECT_EQ(obs, c.observable_reference);
}

}  // namespace

TEST(Circuit, UnpackBitstring) {
    auto bits = unpack_bitstring(1497382, 25);
    // 0b0000101101101100100100110, most significant bit first.
    std::string expect = "0000101101101100100100110";
    ASSERT_EQ(bits.size(), expect.size());
    for (size_t i = 0; i < bits.size(); i++) {
        EXPECT_EQ(bits[i], expect[i] == '1') << "bit " << i;
    }
    auto layout = surface_layout(5);
    EXPECT_EQ(layout.data_qubits[0], (QubitCoord{1, 5}));
    EXPECT_EQ(layout.data_qubits[1], (QubitCoord{2, 4}));
    EXPECT_EQ(layout.data_qubits[2], (QubitCoord{2, 6}));
    EXPECT_EQ(layout.data_qubits[24], (QubitCoord{9, 5}));

    auto zeros = unpack_bitstring(0, 9);
    for (bool b : zeros) {
        EXPECT_FALSE(b);
    }

    auto complement = unpack_bitstring(32057049, 25);
    for (size_t i = 0; i < bits.size(); i++) {
        EXPECT_NE(bits[i], complement[i]);
    }

    EXPECT_THROW(unpack_bitstring(1u << 9, 9), std::invalid_argument);
}

TEST(Circuit, DefaultBitstrings) {
    auto d5 = default_initial_bitstrings(5);
    std::vector<uint64_t> expect5 = {1497382, 32057049, 12984827, 20569604, 10981887,
                                     22572544, 7363158,  26191273, 7264790,  26289641};
    ASSERT_EQ(d5.size(), 10u);
    for (size_t i = 0; i < 10; i++) {
        EXPECT_EQ(d5[i].value, expect5[i]);
        EXPECT_EQ(d5[i].width, 25);
    }
    auto d3 = default_initial_bitstrings(3);
    std::vector<uint64_t> expect3 = {22, 489, 198, 313, 167, 344, 112, 399, 110, 401};
    for (size_t i = 0; i < 10; i++) {
        EXPECT_EQ(d3[i].value, expect3[i]);
    }
    // Consecutive entries are bitwise complements, for any width.
    for (int width : {25, 9, 7, 4, 1}) {
        auto list = default_initial_bitstrings_for_width(width);
        uint64_t mask = (1ull << width) - 1;
        for (size_t i = 0; i < 10; i += 2) {
            EXPECT_EQ(list[i].value ^ list[i + 1].value, mask);
            EXPECT_LT(list[i].value, width == 1 ? 1ull : (1ull << (width - 1)));
        }
    }
}

TEST(Circuit, DetectorCountsMatchFormula) {
    for (int d : {1, 3, 5}) {
        auto layout = surface_layout(d);
        for (int rounds : {1, 2, 3, 4, 5, 6}) {
            for (Basis basis : {Basis::kZ, Basis::kX}) {
                auto c = build_memory_circuit(layout, basis, rounds, {0, layout.num_data()});
                EXPECT_EQ(static_cast<int>(c.detectors.size()),
                          detector_count(layout, basis, rounds))
                    << "d=" << d << " rounds=" << rounds << " basis=" << basis_char(basis);
            }
        }
    }
    auto rep = repetition_layout(4);
    for (int rounds : {1, 2, 5}) {
        auto c = build_memory_circuit(rep, Basis::kZ, rounds, {0, 4});
        EXPECT_EQ(static_cast<int>(c.detectors.size()), detector_count(rep, Basis::kZ, rounds));
    }
}

TEST(Circuit, NoiselessDeterminism) {
    for (int d : {3, 5}) {
        auto layout = surface_layout(d);
        auto inits = default_initial_bitstrings(d);
        for (Basis basis : {Basis::kZ, Basis::kX}) {
            for (size_t i = 0; i < inits.size(); i += 3) {
                auto c = build_memory_circuit(layout, basis, 3, inits[i]);
                expect_noiseless_clean(c, 12345 + i);
                expect_noiseless_clean(c, 999 * (i + 1));
            }
        }
    }
    auto rep = repetition_layout(5);
    for (auto init : default_initial_bitstrings_for_width(5)) {
        auto c = build_memory_circuit(rep, Basis::kZ, 4, init);
        expect_noiseless_clean(c, 7);
    }
}

TEST(Circuit, ObservableMatchesInitialLogicalValue) {
    // The reference-corrected observable of a noiseless run is the initial
    // logical parity; equivalently, the stored reference equals the raw
    // noiseless parity. Complement pairs must carry opposite logical values,
    // which shows up as differing (reference ^ parity-of-init-support).
    auto layout = surface_layout(3);
    auto inits = default_initial_bitstrings(3);
    for (Basis basis : {Basis::kZ, Basis::kX}) {
        std::vector<int> logical_values;
        const auto &support =
            basis == Basis::kZ ? layout.logical_z_support : layout.logical_x_support;
        for (const auto &init : inits) {
            auto bits = unpack_bitstring(init.value, init.width);
            bool parity = false;
            for (QubitCoord q : support) {
                parity ^= bits[layout.data_index(q)];
            }
            logical_values.push_back(parity);
        }
        for (size_t i = 0; i < 10; i += 2) {
            EXPECT_NE(logical_values[i], logical_values[i + 1]);
        }
    }
}

TEST(Circuit, CzCountPerCycle) {
    auto layout = surface_layout(5);
    for (Basis basis : {Basis::kZ, Basis::kX}) {
        for (int rounds : {1, 3}) {
            auto c = build_memory_circuit(layout, basis, rounds, {0, 25});
            EXPECT_EQ(c.count_kind(InstructionKind::kCZ), static_cast<size_t>(80 * rounds));
            // arranged in 4 layers
            int cz_moments = 0;
            for (const auto &m : c.moments) {
                bool has = false;
                for (const auto &ins : m) {
                    has |= ins.kind == InstructionKind::kCZ;
                }
                cz_moments += has;
            }
            EXPECT_EQ(cz_moments, 4 * rounds);
        }
    }
}

// Swapping the basis argument produces circuits with identical gate counts
// for every kind, except the two boundary Hadamard moments: the basis
// conversion sets have sizes ceil(d^2/2) and floor(d^2/2), so the Hadamard
// totals differ by exactly 2 for any odd d.
TEST(Circuit, BasisSwapSymmetry) {
    for (int d : {3, 5}) {
        auto layout = surface_layout(d);
        uint64_t v = d == 3 ? 22 : 1497382;
        auto cz = build_memory_circuit(layout, Basis::kZ, 4, {v, d * d});
        auto cx = build_memory_circuit(layout, Basis::kX, 4, {v, d * d});
        for (InstructionKind k :
             {InstructionKind::kPrepZ, InstructionKind::kXGate, InstructionKind::kCZ,
              InstructionKind::kMeasure, InstructionKind::kReset, InstructionKind::kDDX}) {
            EXPECT_EQ(cz.count_kind(k), cx.count_kind(k)) << instruction_name(k);
        }
        size_t hz = cz.count_kind(InstructionKind::kHadamard);
        size_t hx = cx.count_kind(InstructionKind::kHadamard);
        EXPECT_EQ(hz, hx + 2);
        EXPECT_EQ(cz.moments.size(), cx.moments.size());
    }
}

TEST(Circuit, ValidateCircuit) {
    auto layout = surface_layout(3);
    auto c = build_memory_circuit(layout, Basis::kZ, 2, {22, 9});
    EXPECT_TRUE(validate_circuit(c).empty());

    Circuit broken = c;
    broken.moments[4].push_back({InstructionKind::kXGate, {broken.moments[4][0].targets[0]}});
    EXPECT_EQ(validate_circuit(broken).size(), 1u);

    Circuit bad_detector = c;
    bad_detector.detectors[0].records.push_back(bad_detector.num_records + 5);
    EXPECT_EQ(validate_circuit(bad_detector).size(), 1u);
}

TEST(Circuit, BuildRejectsBadArguments) {
    auto layout = surface_layout(3);
    EXPECT_THROW(build_memory_circuit(layout, Basis::kZ, 0, {0, 9}), std::invalid_argument);
    EXPECT_THROW(build_memory_circuit(layout, Basis::kZ, 2, {0, 25}), std::invalid_argument);
    auto rep = repetition_layout(3);
    EXPECT_THROW(build_memory_circuit(rep, Basis::kX, 2, {0, 3}), std::invalid_argument);
}

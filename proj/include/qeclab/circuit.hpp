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

#ifndef QECLAB_CIRCUIT_H
#define QECLAB_CIRCUIT_H

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "qeclab/layout.hpp"
#include "qeclab/rng.hpp"
#include "qeclab/tableau.hpp"

namespace qeclab {

enum class InstructionKind : uint8_t {
    kPrepZ,
    kXGate,
    kHadamard,
    kCZ,
    kMeasure,
    kReset,
    kDDX,  // dynamical-decoupling X; distinguished so noise models can treat it separately
};

inline const char *instruction_name(InstructionKind k) {
    switch (k) {
        case InstructionKind::kPrepZ: return "PREP_Z";
        case InstructionKind::kXGate: return "X";
        case InstructionKind::kHadamard: return "H";
        case InstructionKind::kCZ: return "CZ";
        case InstructionKind::kMeasure: return "M";
        case InstructionKind::kReset: return "R";
        case InstructionKind::kDDX: return "DDX";
    }
    return "?";
}

struct Instruction {
    InstructionKind kind;
    std::vector<int32_t> targets;  // qubit ids; a CZ holds exactly one pair
};

using Moment = std::vector<Instruction>;

struct DetectorId {
    int32_t round = 0;
    int32_t stabilizer_index = 0;

    bool operator==(const DetectorId &) const = default;
    bool operator<(const DetectorId &other) const {
        return round != other.round ? round < other.round
                                    : stabilizer_index < other.stabilizer_index;
    }
};

struct Detector {
    DetectorId id;
    std::vector<int32_t> records;
    bool reference = false;  // noiseless parity of the referenced records
};

struct InitialBitstring {
    uint64_t value = 0;
    int width = 0;
};

struct Circuit {
    CodeLayout layout;
    Basis basis = Basis::kZ;
    int rounds = 0;
    InitialBitstring init;

    std::vector<QubitCoord> qubits;  // lex sorted; instruction targets index this
    std::vector<Moment> moments;
    std::vector<Detector> detectors;  // sorted round-major, stabilizer ascending
    std::vector<int32_t> observable_records;
    bool observable_reference = false;

    int32_t num_records = 0;
    std::vector<int32_t> record_qubit;   // qubit id measured by each record
    std::vector<uint8_t> reference_records;  // one noiseless run, frozen at build

    int num_qubits() const {
        return static_cast<int>(qubits.size());
    }

    int qubit_id(QubitCoord q) const {
        auto it = std::lower_bound(qubits.begin(), qubits.end(), q);
        if (it == qubits.end() || !(*it == q)) {
            throw std::invalid_argument("unknown qubit " + coord_str(q));
        }
        return static_cast<int>(it - qubits.begin());
    }

    // Index of a detector in the canonical (round-major) order.
    int detector_index(DetectorId id) const {
        auto it = std::lower_bound(
            detectors.begin(), detectors.end(), id,
            [](const Detector &d, const DetectorId &key) { return d.id < key; });
        if (it == detectors.end() || !(it->id == id)) {
            throw std::invalid_argument("no such detector");
        }
        return static_cast<int>(it - detectors.begin());
    }

    Basis detector_basis(int detector_idx) const {
        return layout.stabilizers[detectors[detector_idx].id.stabilizer_index].basis;
    }

    size_t count_kind(InstructionKind k) const {
        size_t n = 0;
        for (const auto &m : moments) {
            for (const auto &ins : m) {
                if (ins.kind == k) {
                    n += ins.kind == InstructionKind::kCZ ? 1 : ins.targets.size();
                }
            }
        }
        return n;
    }
};

/// Expands a bit-packed initial state: the most significant of `width` bits
/// maps to the first data qubit in (row, col) order, the least significant to
/// the last.
inline std::vector<bool> unpack_bitstring(uint64_t value, int width) {
    if (width < 1 || width > 63) {
        throw std::invalid_argument("bitstring width out of range");
    }
    if (value >= (1ull << width)) {
        throw std::invalid_argument("bitstring value exceeds width");
    }
    std::vector<bool> bits(width);
    for (int i = 0; i < width; i++) {
        bits[i] = (value >> (width - 1 - i)) & 1;
    }
    return bits;
}

/// Ten initial data-qubit bitstrings: five random values interleaved with
/// their bitwise complements, so five of each logical value. The d=3 and d=5
/// surface-code lists are fixed; other widths use a fixed-seed generator.
inline std::vector<InitialBitstring> default_initial_bitstrings_for_width(int width) {
    std::vector<InitialBitstring> out;
    auto push_pair = [&](uint64_t v) {
        uint64_t mask = (width >= 64) ? ~0ull : ((1ull << width) - 1);
        out.push_back({v, width});
        out.push_back({v ^ mask, width});
    };
    if (width == 25) {
        for (uint64_t v : {1497382ull, 12984827ull, 10981887ull, 7363158ull, 7264790ull}) {
            push_pair(v);
        }
    } else if (width == 9) {
        for (uint64_t v : {22ull, 198ull, 167ull, 112ull, 110ull}) {
            push_pair(v);
        }
    } else {
        if (width < 1 || width > 63) {
            throw std::invalid_argument("bitstring width out of range");
        }
        CounterRng rng(0x71c5, static_cast<uint64_t>(width));
        uint64_t half_mask = width == 1 ? 0 : ((1ull << (width - 1)) - 1);
        for (int k = 0; k < 5; k++) {
            push_pair(rng.next_u64() & half_mask);
        }
    }
    return out;
}

inline std::vector<InitialBitstring> default_initial_bitstrings(int d) {
    return default_initial_bitstrings_for_width(d * d);
}

namespace detail {

// Data qubits that need a basis-change Hadamard so a computational bitstring
// becomes an eigenstate of every memory-basis stabilizer: exactly the X-role
// legs of those stabilizers. Throws if the layout's CZ layer assignment makes
// the two requirements collide.
inline std::vector<QubitCoord> conversion_set(const CodeLayout &layout, Basis basis) {
    std::map<QubitCoord, int> wanted;  // +1 must convert, -1 must not
    for (const auto &s : layout.stabilizers) {
        if (s.basis != basis) {
            continue;
        }
        for (size_t i = 0; i < s.support.size(); i++) {
            int need = s.leg_basis(i) == Basis::kX ? 1 : -1;
            auto [it, inserted] = wanted.emplace(s.support[i], need);
            if (!inserted && it->second != need) {
                throw std::logic_error(
                    "CZ layer assignment admits no initialization Hadamard pattern");
            }
        }
    }
    std::vector<QubitCoord> set;
    for (const auto &[q, need] : wanted) {
        if (need > 0) {
            set.push_back(q);
        }
    }
    return set;
}

}  // namespace detail

/// Builds the full memory experiment: bitstring preparation, `rounds`
/// stabilizer cycles (four CZ layers with the ZXXZ Hadamard pattern and
/// dynamical-decoupling X gates), and a final transversal measurement.
/// Detector reference parities are frozen from a noiseless run at build time.
inline Circuit build_memory_circuit(const CodeLayout &layout, Basis basis, int rounds,
                                    InitialBitstring init) {
    if (rounds < 1) {
        throw std::invalid_argument("rounds must be >= 1");
    }
    if (layout.kind == CodeKind::kRepetition && basis != Basis::kZ) {
        throw std::invalid_argument("repetition code memory runs in the Z basis only");
    }
    if (init.width != layout.num_data()) {
        throw std::invalid_argument("initial bitstring width must equal the data qubit count");
    }

    Circuit c;
    c.layout = layout;
    c.basis = basis;
    c.rounds = rounds;
    c.init = init;
    c.qubits = layout.all_qubits();
    std::sort(c.qubits.begin(), c.qubits.end());

    auto ids_of = [&](const std::vector<QubitCoord> &qs) {
        std::vector<int32_t> ids;
        ids.reserve(qs.size());
        for (QubitCoord q : qs) {
            ids.push_back(c.qubit_id(q));
        }
        std::sort(ids.begin(), ids.end());
        return ids;
    };

    const std::vector<int32_t> data_ids = ids_of(layout.data_qubits);
    std::vector<QubitCoord> measure_coords;
    for (const auto &s : layout.stabilizers) {
        measure_coords.push_back(s.measure_qubit);
    }
    const std::vector<int32_t> measure_ids = ids_of(measure_coords);
    std::vector<int32_t> all_ids(c.num_qubits());
    for (int i = 0; i < c.num_qubits(); i++) {
        all_ids[i] = i;
    }

    const std::vector<QubitCoord> conversion = detail::conversion_set(layout, basis);
    const std::vector<int32_t> conversion_ids = ids_of(conversion);

    bool any_x_leg = false;
    for (const auto &s : layout.stabilizers) {
        for (size_t i = 0; i < s.support.size(); i++) {
            any_x_leg |= s.leg_basis(i) == Basis::kX;
        }
    }

    // stabilizer index sorted by measure qubit already (layout contract)
    // rec_of[t-1][s] = record index of stabilizer s in cycle t
    std::vector<std::vector<int32_t>> rec_of(rounds,
                                             std::vector<int32_t>(layout.num_measure(), -1));
    std::vector<int32_t> final_data_rec(c.num_qubits(), -1);

    auto measure_qubit_stab = [&]() {
        std::map<int32_t, int> m;
        for (int s = 0; s < layout.num_measure(); s++) {
            m[c.qubit_id(layout.stabilizers[s].measure_qubit)] = s;
        }
        return m;
    }();

    auto emit_measure = [&](const std::vector<int32_t> &targets, int cycle) {
        Instruction ins{InstructionKind::kMeasure, targets};
        for (int32_t q : targets) {
            auto it = measure_qubit_stab.find(q);
            if (it != measure_qubit_stab.end()) {
                rec_of[cycle - 1][it->second] = c.num_records;
            } else {
                final_data_rec[q] = c.num_records;
            }
            c.record_qubit.push_back(q);
            c.num_records++;
        }
        return ins;
    };

    // Initialization: reset everything, set the bitstring, convert basis.
    c.moments.push_back({Instruction{InstructionKind::kPrepZ, all_ids}});
    std::vector<bool> bits = unpack_bitstring(init.value, init.width);
    std::vector<int32_t> flip_ids;
    for (int i = 0; i < layout.num_data(); i++) {
        if (bits[i]) {
            flip_ids.push_back(c.qubit_id(layout.data_qubits[i]));
        }
    }
    std::sort(flip_ids.begin(), flip_ids.end());
    Moment prep;
    if (!flip_ids.empty()) {
        prep.push_back({InstructionKind::kXGate, flip_ids});
    }
    c.moments.push_back(std::move(prep));
    Moment convert;
    if (!conversion_ids.empty()) {
        convert.push_back({InstructionKind::kHadamard, conversion_ids});
    }
    c.moments.push_back(std::move(convert));

    auto cz_layer_moment = [&](int layer) {
        Moment m;
        for (const auto &s : layout.stabilizers) {
            int8_t sup = s.layer_to_support[layer];
            if (sup < 0) {
                continue;
            }
            m.push_back({InstructionKind::kCZ,
                         {c.qubit_id(s.measure_qubit), c.qubit_id(s.support[sup])}});
        }
        return m;
    };

    for (int cycle = 1; cycle <= rounds; cycle++) {
        c.moments.push_back({{InstructionKind::kHadamard, measure_ids},
                             {InstructionKind::kDDX, data_ids}});
        c.moments.push_back(cz_layer_moment(0));
        if (any_x_leg) {
            c.moments.push_back({{InstructionKind::kHadamard, data_ids},
                                 {InstructionKind::kDDX, measure_ids}});
            c.moments.push_back(cz_layer_moment(1));
            c.moments.push_back({{InstructionKind::kDDX, all_ids}});
            c.moments.push_back(cz_layer_moment(2));
            c.moments.push_back({{InstructionKind::kHadamard, data_ids},
                                 {InstructionKind::kDDX, measure_ids}});
        } else {
            c.moments.push_back({{InstructionKind::kDDX, all_ids}});
        }
        c.moments.push_back(cz_layer_moment(3));
        if (cycle < rounds) {
            c.moments.push_back({{InstructionKind::kHadamard, measure_ids},
                                 {InstructionKind::kDDX, data_ids}});
            c.moments.push_back({emit_measure(measure_ids, cycle),
                                 Instruction{InstructionKind::kDDX, data_ids}});
            c.moments.push_back({{InstructionKind::kReset, measure_ids}});
        } else {
            std::vector<int32_t> final_h = measure_ids;
            final_h.insert(final_h.end(), conversion_ids.begin(), conversion_ids.end());
            std::sort(final_h.begin(), final_h.end());
            c.moments.push_back({{InstructionKind::kHadamard, final_h}});
            c.moments.push_back({emit_measure(all_ids, cycle)});
        }
    }

    // Detectors. Memory-basis stabilizers compare rounds 0..r (the last one
    // built from final data-qubit parities); the opposite basis only has the
    // bulk comparisons 1..r-1.
    for (int s = 0; s < layout.num_measure(); s++) {
        const Stabilizer &stab = layout.stabilizers[s];
        bool same = stab.basis == basis;
        if (same) {
            c.detectors.push_back({{0, s}, {rec_of[0][s]}, false});
        }
        for (int t = 1; t <= rounds - 1; t++) {
            c.detectors.push_back({{t, s}, {rec_of[t - 1][s], rec_of[t][s]}, false});
        }
        if (same) {
            std::vector<int32_t> recs;
            for (QubitCoord q : stab.support) {
                recs.push_back(final_data_rec[c.qubit_id(q)]);
            }
            recs.push_back(rec_of[rounds - 1][s]);
            std::sort(recs.begin(), recs.end());
            c.detectors.push_back({{rounds, s}, std::move(recs), false});
        }
    }
    std::sort(c.detectors.begin(), c.detectors.end(),
              [](const Detector &a, const Detector &b) { return a.id < b.id; });

    const auto &logical =
        basis == Basis::kZ ? layout.logical_z_support : layout.logical_x_support;
    for (QubitCoord q : logical) {
        c.observable_records.push_back(final_data_rec[c.qubit_id(q)]);
    }
    std::sort(c.observable_records.begin(), c.observable_records.end());

    // Freeze reference parities from one noiseless run. Individual records
    // may be random (undetermined first-round stabilizers), but every
    // detector parity and the observable parity are deterministic.
    StabilizerTableau tableau(c.num_qubits());
    CounterRng rng(0, 0);
    std::vector<bool> ref;
    ref.reserve(c.num_records);
    for (const auto &moment : c.moments) {
        for (const auto &ins : moment) {
            switch (ins.kind) {
                case InstructionKind::kPrepZ:
                case InstructionKind::kReset:
                    for (int32_t q : ins.targets) tableau.reset(q, rng);
                    break;
                case InstructionKind::kXGate:
                case InstructionKind::kDDX:
                    for (int32_t q : ins.targets) tableau.x(q);
                    break;
                case InstructionKind::kHadamard:
                    for (int32_t q : ins.targets) tableau.h(q);
                    break;
                case InstructionKind::kCZ:
                    tableau.cz(ins.targets[0], ins.targets[1]);
                    break;
                case InstructionKind::kMeasure:
                    for (int32_t q : ins.targets) ref.push_back(tableau.measure(q, rng));
                    break;
            }
        }
    }
    for (auto &det : c.detectors) {
        bool parity = false;
        for (int32_t r : det.records) {
            parity ^= ref[r];
        }
        det.reference = parity;
    }
    bool obs = false;
    for (int32_t r : c.observable_records) {
        obs ^= ref[r];
    }
    c.observable_reference = obs;
    c.reference_records.assign(ref.begin(), ref.end());
    return c;
}

/// Structural checks: moment exclusivity, record validity, measure/reset
/// pairing. Returns human-readable violations; empty means valid.
inline std::vector<std::string> validate_circuit(const Circuit &c) {
    std::vector<std::string> violations;
    for (size_t mi = 0; mi < c.moments.size(); mi++) {
        std::set<int32_t> seen;
        for (const auto &ins : c.moments[mi]) {
            if (ins.kind == InstructionKind::kCZ && ins.targets.size() != 2) {
                violations.push_back("moment " + std::to_string(mi) + ": CZ without a target pair");
            }
            for (int32_t q : ins.targets) {
                if (q < 0 || q >= c.num_qubits()) {
                    violations.push_back("moment " + std::to_string(mi) + ": target out of range");
                } else if (!seen.insert(q).second) {
                    violations.push_back("moment " + std::to_string(mi) + ": qubit " +
                                         coord_str(c.qubits[q]) + " targeted twice");
                }
            }
        }
    }
    for (const auto &det : c.detectors) {
        if (det.records.empty()) {
            violations.push_back("detector with no records");
        }
        for (int32_t r : det.records) {
            if (r < 0 || r >= c.num_records) {
                violations.push_back("detector record index out of range");
            }
        }
    }
    for (int32_t r : c.observable_records) {
        if (r < 0 || r >= c.num_records) {
            violations.push_back("observable record index out of range");
        }
    }
    // Every mid-circuit measurement of a qubit must be followed by a reset
    // of that qubit before it is acted on again.
    for (size_t mi = 0; mi + 1 < c.moments.size(); mi++) {
        for (const auto &ins : c.moments[mi]) {
            if (ins.kind != InstructionKind::kMeasure) {
                continue;
            }
            for (int32_t q : ins.targets) {
                bool ok = false;
                for (size_t mj = mi + 1; mj < std::min(mi + 3, c.moments.size()); mj++) {
                    for (const auto &other : c.moments[mj]) {
                        if (other.kind == InstructionKind::kReset &&
                            std::find(other.targets.begin(), other.targets.end(), q) !=
                                other.targets.end()) {
                            ok = true;
                        }
                    }
                }
                if (!ok) {
                    violations.push_back("qubit " + coord_str(c.qubits[q]) +
                                         " measured mid-circuit without reset");
                }
            }
        }
    }
    return violations;
}

}  // namespace qeclab

#endif

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

#ifndef QECLAB_EDGES_H
#define QECLAB_EDGES_H

#include <map>
#include <set>
#include <vector>

#include "qeclab/dem.hpp"

namespace qeclab {

/// Detector-pair taxonomy: timelike, spacelike (by basis), spacetimelike
/// pairs expected from CZ errors, remaining short-range diagonals, and
/// everything else.
enum class EdgeClass : uint8_t { kT, kSX, kSZ, kST, kSTPrime, kOther };

inline const char *edge_class_name(EdgeClass c) {
    switch (c) {
        case EdgeClass::kT: return "T";
        case EdgeClass::kSX: return "SX";
        case EdgeClass::kSZ: return "SZ";
        case EdgeClass::kST: return "ST";
        case EdgeClass::kSTPrime: return "ST'";
        case EdgeClass::kOther: return "other";
    }
    return "?";
}

class EdgeClassifier {
  public:
    /// Builds the taxonomy for one circuit. The ST class (spacetimelike
    /// pairs expected from Pauli noise) is derived by propagating CZ faults
    /// symbolically rather than from a hand-coded geometric table, so it
    /// stays correct if the CZ schedule changes.
    EdgeClassifier(const CodeLayout &layout, const Circuit &circuit) : layout_(layout) {
        ids_ = circuit_detector_ids(circuit);
        // CZ-only noise: every two-detector bin of its error model whose
        // rounds differ by one is an expected spacetimelike pair.
        ComponentRates cz_only = ComponentRates::zero();
        cz_only.cz_gate = 1e-3;
        NoisePlan plan = build_noise_model(cz_only, NoiseMode::kPauli).assign(circuit);
        ErrorHypergraph dem = dem_from_noise(circuit, plan);
        for (const auto &e : dem.edges) {
            if (e.detectors.size() != 2) {
                continue;
            }
            DetectorId a = ids_[e.detectors[0]], b = ids_[e.detectors[1]];
            if (std::abs(a.round - b.round) == 1 && a.stabilizer_index != b.stabilizer_index) {
                expected_st_.insert(stab_pair(a.stabilizer_index, b.stabilizer_index));
            }
        }
    }

    EdgeClass classify(DetectorId a, DetectorId b) const {
        const Stabilizer &sa = layout_.stabilizers[a.stabilizer_index];
        const Stabilizer &sb = layout_.stabilizers[b.stabilizer_index];
        int dt = std::abs(a.round - b.round);
        if (a.stabilizer_index == b.stabilizer_index) {
            return dt == 1 ? EdgeClass::kT : (dt == 2 ? EdgeClass::kSTPrime : EdgeClass::kOther);
        }
        if (dt == 0 && sa.basis == sb.basis && share_data_qubit(sa, sb)) {
            return sa.basis == Basis::kX ? EdgeClass::kSX : EdgeClass::kSZ;
        }
        if (dt == 1 &&
            expected_st_.count(stab_pair(a.stabilizer_index, b.stabilizer_index))) {
            return EdgeClass::kST;
        }
        if (dt == 1 || dt == 2) {
            return EdgeClass::kSTPrime;
        }
        return EdgeClass::kOther;
    }

    /// Mean correlation per class over all detector pairs of the matrix.
    std::map<EdgeClass, double> class_means(const CorrelationMatrix &c) const {
        std::map<EdgeClass, std::pair<double, size_t>> acc;
        for (int32_t i = 0; i < c.n; i++) {
            for (int32_t j = i + 1; j < c.n; j++) {
                double v = c.at(i, j);
                if (std::isnan(v)) {
                    continue;
                }
                auto &slot = acc[classify(ids_[i], ids_[j])];
                slot.first += v;
                slot.second++;
            }
        }
        std::map<EdgeClass, double> means;
        for (auto &[cls, slot] : acc) {
            means[cls] = slot.second ? slot.first / slot.second : 0.0;
        }
        return means;
    }

  private:
    static std::vector<DetectorId> circuit_detector_ids(const Circuit &c) {
        std::vector<DetectorId> ids;
        for (const auto &d : c.detectors) {
            ids.push_back(d.id);
        }
        return ids;
    }

    static int64_t stab_pair(int32_t a, int32_t b) {
        if (a > b) {
            std::swap(a, b);
        }
        return (static_cast<int64_t>(a) << 32) | static_cast<uint32_t>(b);
    }

    bool share_data_qubit(const Stabilizer &a, const Stabilizer &b) const {
        for (QubitCoord qa : a.support) {
            for (QubitCoord qb : b.support) {
                if (qa == qb) {
                    return true;
                }
            }
        }
        return false;
    }

    CodeLayout layout_;
    std::vector<DetectorId> ids_;
    std::set<int64_t> expected_st_;
};

}  // namespace qeclab

#endif

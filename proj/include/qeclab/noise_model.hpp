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

#ifndef QECLAB_NOISE_MODEL_H
#define QECLAB_NOISE_MODEL_H

#include <map>
#include <optional>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "qeclab/channels.hpp"
#include "qeclab/circuit.hpp"

namespace qeclab {

enum class Component : uint8_t {
    kSqGate,
    kCzGate,
    kDataIdle,
    kReset,
    kReadout,
    kCzLeakage,
    kHeatingLeakage,
    kCzCrosstalk,
};

inline const char *component_name(Component c) {
    switch (c) {
        case Component::kSqGate: return "sq_gate";
        case Component::kCzGate: return "cz_gate";
        case Component::kDataIdle: return "data_idle";
        case Component::kReset: return "reset";
        case Component::kReadout: return "readout";
        case Component::kCzLeakage: return "cz_leakage";
        case Component::kHeatingLeakage: return "heating_leakage";
        case Component::kCzCrosstalk: return "cz_crosstalk";
    }
    return "?";
}

inline constexpr Component kAllComponents[] = {
    Component::kSqGate,      Component::kCzGate,     Component::kDataIdle,
    Component::kReset,       Component::kReadout,    Component::kCzLeakage,
    Component::kHeatingLeakage, Component::kCzCrosstalk,
};

/// Average error probability per circuit component. Defaults are the
/// device-average operation point of the distance-5 experiments.
struct ComponentRates {
    double sq_gate = 1.09e-3;
    double cz_gate = 6.05e-3;
    double data_idle = 2.46e-2;
    double reset = 1.86e-3;
    double readout = 1.96e-2;
    double cz_leakage = 2.0e-4;       // leak probability per CZ (0.25 * p_t)
    double heating_leakage = 6.4e-4;  // leak probability per qubit per cycle
    double cz_crosstalk = 9.5e-4;

    double get(Component c) const {
        switch (c) {
            case Component::kSqGate: return sq_gate;
            case Component::kCzGate: return cz_gate;
            case Component::kDataIdle: return data_idle;
            case Component::kReset: return reset;
            case Component::kReadout: return readout;
            case Component::kCzLeakage: return cz_leakage;
            case Component::kHeatingLeakage: return heating_leakage;
            case Component::kCzCrosstalk: return cz_crosstalk;
        }
        return 0;
    }

    void set(Component c, double v) {
        switch (c) {
            case Component::kSqGate: sq_gate = v; break;
            case Component::kCzGate: cz_gate = v; break;
            case Component::kDataIdle: data_idle = v; break;
            case Component::kReset: reset = v; break;
            case Component::kReadout: readout = v; break;
            case Component::kCzLeakage: cz_leakage = v; break;
            case Component::kHeatingLeakage: heating_leakage = v; break;
            case Component::kCzCrosstalk: cz_crosstalk = v; break;
        }
    }

    ComponentRates scaled(double s) const {
        ComponentRates r = *this;
        for (Component c : kAllComponents) {
            r.set(c, get(c) * s);
        }
        return r;
    }

    void validate() const {
        for (Component c : kAllComponents) {
            double v = get(c);
            if (v < 0 || v > 1 || !std::isfinite(v)) {
                throw std::invalid_argument(std::string("rate out of range: ") +
                                            component_name(c));
            }
        }
    }

    static ComponentRates zero() {
        ComponentRates r;
        for (Component c : kAllComponents) {
            r.set(c, 0.0);
        }
        return r;
    }
};

enum class NoiseMode : uint8_t { kPauli, kPauliPlus };

/// Full noise description: component rates plus the physical parameters that
/// back the leakage-aware channels.
struct NoiseConfig {
    ComponentRates rates;
    NoiseMode mode = NoiseMode::kPauli;
    double t1 = 20e-6;
    double tphi = 120e-6;  // from T2,CPMG = 30us with T1 = 20us
    double t_cycle = 896e-9;
    double phi2 = M_PI / 2;  // conditional phase on the partner of a leaked device
    double phi3 = M_PI / 2;
    // Error rate of dynamical-decoupling X gates; defaults to sq_gate. Kept
    // separate so sensitivity scans can vary logical SQ gates while DD gates
    // stay at the base rate.
    std::optional<double> dd_gate;
    std::map<QubitCoord, double> t1_override;
    std::map<QubitCoord, double> tphi_override;
    std::map<QubitCoord, double> gamma_override;
    std::map<std::pair<QubitCoord, QubitCoord>, double> crosstalk_override;

    double gamma12() const {
        return t_cycle > 0 ? 2.0 * rates.heating_leakage / t_cycle : 0.0;
    }

    double p_t() const {
        return 4.0 * rates.cz_leakage;
    }

    // Depolarizing share of the CZ budget. In Pauli mode the full measured
    // CZ error is depolarizing; in Pauli+ the crosstalk and leakage
    // contributions are subtracted to avoid double counting.
    double cz_depolarizing() const {
        if (mode == NoiseMode::kPauli) {
            return rates.cz_gate;
        }
        return std::max(0.0, rates.cz_gate - rates.cz_crosstalk - 1.25 * rates.cz_leakage);
    }
};

enum class SiteKind : uint8_t { kPauli1, kPauli2, kGpc };

// One noise site: a channel applied after instruction (moment, instr), or
// before the moment when instr is -1.
struct NoiseSite {
    int32_t moment = 0;
    int32_t instr = 0;
    SiteKind kind = SiteKind::kPauli1;
    int32_t channel = 0;  // pool index
    std::array<int32_t, 2> targets{-1, -1};
};

// A GPC with precomputed cumulative tables for sampling.
struct SamplableGpc {
    GPChannel gpc;
    std::vector<std::vector<double>> transition_cumulative;   // per initial code
    std::vector<std::vector<std::vector<double>>> pauli_cumulative;

    explicit SamplableGpc(GPChannel g) : gpc(std::move(g)) {
        transition_cumulative.resize(gpc.transitions.size());
        pauli_cumulative.resize(gpc.transitions.size());
        for (size_t code = 0; code < gpc.transitions.size(); code++) {
            double acc = 0;
            for (const auto &t : gpc.transitions[code]) {
                acc += t.prob;
                transition_cumulative[code].push_back(acc);
                std::vector<double> pc;
                double pa = 0;
                for (double p : t.pauli) {
                    pa += p;
                    pc.push_back(pa);
                }
                pauli_cumulative[code].push_back(std::move(pc));
            }
        }
    }
};

/// The materialized assignment of a channel to every noisy site of one
/// circuit, plus the classical readout confusion per qubit.
struct NoisePlan {
    std::vector<NoiseSite> sites;  // sorted by (moment, instr, emission order)
    std::vector<PauliChannel> pauli_pool;
    std::vector<SamplableGpc> gpc_pool;
    std::vector<ReadoutConfusion> confusion;  // per qubit id
    bool has_leakage = false;

    // sites grouped per moment for the simulators
    std::vector<size_t> moment_site_begin;  // size = moments + 1
};

/// Noise model: immutable once built; assigns channels to circuit sites.
class NoiseModel {
  public:
    explicit NoiseModel(NoiseConfig config) : config_(config) {
        config_.rates.validate();
        if (config_.mode == NoiseMode::kPauliPlus) {
            cz_leak_gpc_ = twirl(cz_leakage_channel(config_.p_t()));
            partner_phase_gpc_ = leaked_partner_phase_gpc(config_.phi2, config_.phi3);
        }
    }

    const NoiseConfig &config() const {
        return config_;
    }

    NoisePlan assign(const Circuit &circuit) const {
        NoisePlan plan;
        const double dd_rate = config_.dd_gate.value_or(config_.rates.sq_gate);
        const double cz_depol = config_.cz_depolarizing();

        auto pauli_index = [&](const PauliChannel &c) {
            plan.pauli_pool.push_back(c);
            return static_cast<int32_t>(plan.pauli_pool.size() - 1);
        };
        int32_t sq_ch = pauli_index(depolarize1(config_.rates.sq_gate));
        int32_t dd_ch = pauli_index(depolarize1(dd_rate));
        int32_t idle_ch = pauli_index(depolarize1(config_.rates.data_idle));
        int32_t cz_ch = pauli_index(depolarize2(cz_depol));
        int32_t xtalk_ch = pauli_index(depolarize2(config_.rates.cz_crosstalk));

        int32_t leak_gpc = -1, phase_gpc = -1;
        std::map<std::tuple<double, double, double>, int32_t> heating_cache;
        auto heating_gpc_for = [&](QubitCoord q) -> int32_t {
            double t1 = lookup(config_.t1_override, q, config_.t1);
            double tphi = lookup(config_.tphi_override, q, config_.tphi);
            double gamma = lookup(config_.gamma_override, q, config_.gamma12());
            auto key = std::make_tuple(t1, tphi, gamma);
            auto it = heating_cache.find(key);
            if (it != heating_cache.end()) {
                return it->second;
            }
            GPChannel g = strip_computational_pauli(
                twirl(idle_channel(t1, tphi, gamma, config_.t_cycle)));
            plan.gpc_pool.emplace_back(std::move(g));
            int32_t idx = static_cast<int32_t>(plan.gpc_pool.size() - 1);
            heating_cache.emplace(key, idx);
            return idx;
        };
        if (config_.mode == NoiseMode::kPauliPlus) {
            plan.gpc_pool.emplace_back(cz_leak_gpc_);
            leak_gpc = 0;
            plan.gpc_pool.emplace_back(partner_phase_gpc_);
            phase_gpc = 1;
            heating_cache.clear();
        }

        auto add_pauli1 = [&](int32_t m, int32_t i, int32_t q, int32_t ch) {
            if (plan.pauli_pool[ch].total() > 0) {
                plan.sites.push_back({m, i, SiteKind::kPauli1, ch, {q, -1}});
            }
        };
        auto add_pauli2 = [&](int32_t m, int32_t i, int32_t a, int32_t b, int32_t ch) {
            if (plan.pauli_pool[ch].total() > 0) {
                plan.sites.push_back({m, i, SiteKind::kPauli2, ch, {a, b}});
            }
        };

        for (int32_t mi = 0; mi < static_cast<int32_t>(circuit.moments.size()); mi++) {
            const Moment &moment = circuit.moments[mi];
            bool has_measure = false;
            for (const auto &ins : moment) {
                has_measure |= ins.kind == InstructionKind::kMeasure;
            }
            if (has_measure && config_.mode == NoiseMode::kPauliPlus) {
                // Leakage heating and decay, applied once per cycle.
                for (int32_t q = 0; q < circuit.num_qubits(); q++) {
                    int32_t ch = heating_gpc_for(circuit.qubits[q]);
                    plan.sites.push_back({mi, -1, SiteKind::kGpc, ch, {q, -1}});
                }
            }
            for (int32_t ii = 0; ii < static_cast<int32_t>(moment.size()); ii++) {
                const Instruction &ins = moment[ii];
                switch (ins.kind) {
                    case InstructionKind::kHadamard:
                    case InstructionKind::kXGate:
                        for (int32_t q : ins.targets) {
                            add_pauli1(mi, ii, q, sq_ch);
                        }
                        break;
                    case InstructionKind::kDDX:
                        for (int32_t q : ins.targets) {
                            add_pauli1(mi, ii, q, has_measure ? idle_ch : dd_ch);
                        }
                        break;
                    case InstructionKind::kCZ: {
                        int32_t a = ins.targets[0], b = ins.targets[1];
                        add_pauli2(mi, ii, a, b, cz_ch);
                        if (config_.mode == NoiseMode::kPauliPlus) {
                            plan.sites.push_back({mi, ii, SiteKind::kGpc, leak_gpc, {a, b}});
                            plan.sites.push_back({mi, ii, SiteKind::kGpc, phase_gpc, {a, b}});
                            int32_t ch = xtalk_ch;
                            auto key = std::make_pair(circuit.qubits[a], circuit.qubits[b]);
                            auto it = config_.crosstalk_override.find(key);
                            if (it != config_.crosstalk_override.end()) {
                                ch = pauli_index(depolarize2(it->second));
                            }
                            add_pauli2(mi, ii, a, b, ch);
                        }
                        break;
                    }
                    default:
                        break;
                }
            }
        }

        // Classical readout confusion; measure-qubit reset error folds into
        // the readout flip probability.
        double eps_data = config_.rates.readout;
        double eps_measure = std::min(1.0, config_.rates.readout + config_.rates.reset);
        plan.confusion.resize(circuit.num_qubits());
        for (int32_t q = 0; q < circuit.num_qubits(); q++) {
            double eps = circuit.layout.is_data(circuit.qubits[q]) ? eps_data : eps_measure;
            plan.confusion[q] = readout_confusion(eps, eps);
        }

        for (const auto &g : plan.gpc_pool) {
            plan.has_leakage |= !g.gpc.is_leakless();
        }
        plan.moment_site_begin.assign(circuit.moments.size() + 1, 0);
        std::stable_sort(plan.sites.begin(), plan.sites.end(),
                         [](const NoiseSite &a, const NoiseSite &b) {
                             return a.moment != b.moment ? a.moment < b.moment
                                                         : a.instr < b.instr;
                         });
        size_t cursor = 0;
        for (size_t m = 0; m < circuit.moments.size(); m++) {
            plan.moment_site_begin[m] = cursor;
            while (cursor < plan.sites.size() &&
                   plan.sites[cursor].moment == static_cast<int32_t>(m)) {
                cursor++;
            }
        }
        plan.moment_site_begin[circuit.moments.size()] = plan.sites.size();
        return plan;
    }

  private:
    template <typename M>
    static double lookup(const M &map, QubitCoord q, double fallback) {
        auto it = map.find(q);
        return it == map.end() ? fallback : it->second;
    }

    NoiseConfig config_;
    GPChannel cz_leak_gpc_;
    GPChannel partner_phase_gpc_;
};

inline NoiseModel build_noise_model(const ComponentRates &rates, NoiseMode mode) {
    NoiseConfig cfg;
    cfg.rates = rates;
    cfg.mode = mode;
    return NoiseModel(cfg);
}

}  // namespace qeclab

#endif

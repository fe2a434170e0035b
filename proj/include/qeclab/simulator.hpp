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

#ifndef QECLAB_SIMULATOR_H
#define QECLAB_SIMULATOR_H

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qeclab/circuit.hpp"
#include "qeclab/noise_model.hpp"
#include "qeclab/rng.hpp"
#include "qeclab/tableau.hpp"
#include "qeclab/threading.hpp"

namespace qeclab {

/// Records of one shot, one symbol per Measure target: 0/1 for computational
/// outcomes, 2/3 for leaked devices (before readout confusion).
struct ShotResult {
    std::vector<uint8_t> records;
};

struct SampleBatch {
    size_t shots = 0;
    int32_t num_records = 0;
    uint64_t master_seed = 0;
    std::vector<uint8_t> records;  // shots x num_records, row major

    uint8_t &at(size_t shot, int32_t record) {
        return records[shot * num_records + record];
    }
    uint8_t at(size_t shot, int32_t record) const {
        return records[shot * num_records + record];
    }
};

namespace detail {

// RNG stream ids: instruction randomness uses a reserved site index so that
// per-site streams never collide with it.
inline constexpr uint64_t kInstructionStream = ~0ull;

struct GpcSampled {
    const GPTransition *transition;
    int pauli_code;
};

inline GpcSampled sample_gpc(const SamplableGpc &s, int initial_code, CounterRng &rng) {
    const auto &cumulative = s.transition_cumulative[initial_code];
    if (cumulative.empty()) {
        throw std::logic_error("GP channel has no outcomes for this leakage subspace");
    }
    size_t t = rng.sample_cumulative(cumulative);
    const GPTransition &tr = s.gpc.transitions[initial_code][t];
    int code = 0;
    if (!tr.pauli.empty()) {
        code = static_cast<int>(rng.sample_cumulative(s.pauli_cumulative[initial_code][t]));
    }
    return {&tr, code};
}

// Samples a Pauli channel; returns 0 when no error fires, otherwise the
// packed base-4 code.
inline int sample_pauli(const PauliChannel &c, CounterRng &rng) {
    double u = rng.next_double();
    double acc = 0;
    for (size_t i = 1; i < c.probs.size(); i++) {
        acc += c.probs[i];
        if (u < acc) {
            return static_cast<int>(i);
        }
    }
    return 0;
}

}  // namespace detail

/// One shot through the leakage-labelled stabilizer engine. The simulation
/// consists of four operation types: Clifford gates (skipped when a target
/// is leaked), computational-basis measurement (returning the leakage label
/// of leaked devices), reset, and Generalized Pauli channels.
inline ShotResult run_shot(const Circuit &circuit, const NoisePlan &plan, uint64_t master_seed,
                           uint64_t shot, bool check_invariants = false) {
    const int n = circuit.num_qubits();
    StabilizerTableau tableau(n);
    std::vector<LeakLabel> labels(n, kComputational);
    CounterRng instr_rng(master_seed, shot, detail::kInstructionStream);
    ShotResult result;
    result.records.reserve(circuit.num_records);

    int computational = n;
    size_t site_cursor = 0;

    auto apply_site = [&](const NoiseSite &site, size_t site_index) {
        CounterRng rng(master_seed, shot, site_index);
        if (site.kind == SiteKind::kPauli1 || site.kind == SiteKind::kPauli2) {
            const PauliChannel &ch = plan.pauli_pool[site.channel];
            int code = detail::sample_pauli(ch, rng);
            if (code == 0) {
                return;
            }
            PauliRow err(tableau.words());
            for (int t = 0; t < ch.arity; t++) {
                int32_t q = site.targets[t];
                if (labels[q] != kComputational) {
                    continue;  // leaked devices receive no Pauli
                }
                int c = (code >> (2 * t)) & 3;
                err.set_x(q, c & 1);
                err.set_z(q, (c >> 1) & 1);
            }
            tableau.apply_pauli(err);
            return;
        }
        const SamplableGpc &g = plan.gpc_pool[site.channel];
        const int arity = g.gpc.arity;
        LeakLabel initial[2] = {kComputational, kComputational};
        for (int t = 0; t < arity; t++) {
            initial[t] = labels[site.targets[t]];
        }
        int icode = GPChannel::encode_labels(initial, arity);
        auto sampled = detail::sample_gpc(g, icode, rng);
        const GPTransition &tr = *sampled.transition;
        // Devices leaving the computational subspace are traced out.
        for (int t = 0; t < arity; t++) {
            int32_t q = site.targets[t];
            if (initial[t] == kComputational && tr.to[t] != kComputational) {
                tableau.trace_out(q, instr_rng);
                labels[q] = tr.to[t];
                computational--;
            }
        }
        // Pauli on the devices that remain computational.
        if (!tr.pauli.empty() && sampled.pauli_code != 0) {
            PauliRow err(tableau.words());
            int bit = 0;
            for (int t = 0; t < arity; t++) {
                if (!(tr.r_mask & (1 << t))) {
                    continue;
                }
                int c = (sampled.pauli_code >> (2 * bit)) & 3;
                bit++;
                err.set_x(site.targets[t], c & 1);
                err.set_z(site.targets[t], (c >> 1) & 1);
            }
            tableau.apply_pauli(err);
        }
        // Devices coming down from leakage reappear as random computational
        // states; label transitions within the leaked manifold just relabel.
        for (int t = 0; t < arity; t++) {
            int32_t q = site.targets[t];
            if (initial[t] != kComputational && tr.to[t] == kComputational) {
                tableau.append_z_row(q, instr_rng.next_bool());
                labels[q] = kComputational;
                computational++;
            } else if (initial[t] != kComputational) {
                labels[q] = tr.to[t];
            }
        }
    };

    for (size_t mi = 0; mi < circuit.moments.size(); mi++) {
        // Sites before the moment (instr == -1).
        site_cursor = plan.moment_site_begin[mi];
        size_t moment_end = plan.moment_site_begin[mi + 1];
        while (site_cursor < moment_end && plan.sites[site_cursor].instr < 0) {
            apply_site(plan.sites[site_cursor], site_cursor);
            site_cursor++;
        }
        const Moment &moment = circuit.moments[mi];
        for (int32_t ii = 0; ii < static_cast<int32_t>(moment.size()); ii++) {
            const Instruction &ins = moment[ii];
            switch (ins.kind) {
                case InstructionKind::kPrepZ:
                case InstructionKind::kReset:
                    for (int32_t q : ins.targets) {
                        if (labels[q] != kComputational) {
                            labels[q] = kComputational;
                            tableau.append_z_row(q, false);
                            computational++;
                        } else {
                            tableau.reset(q, instr_rng);
                        }
                    }
                    break;
                case InstructionKind::kHadamard:
                    for (int32_t q : ins.targets) {
                        if (labels[q] == kComputational) {
                            tableau.h(q);
                        }
                    }
                    break;
                case InstructionKind::kXGate:
                case InstructionKind::kDDX:
                    for (int32_t q : ins.targets) {
                        if (labels[q] == kComputational) {
                            tableau.x(q);
                        }
                    }
                    break;
                case InstructionKind::kCZ:
                    if (labels[ins.targets[0]] == kComputational &&
                        labels[ins.targets[1]] == kComputational) {
                        tableau.cz(ins.targets[0], ins.targets[1]);
                    }
                    break;
                case InstructionKind::kMeasure:
                    for (int32_t q : ins.targets) {
                        if (labels[q] != kComputational) {
                            result.records.push_back(static_cast<uint8_t>(labels[q] + 1));
                        } else {
                            result.records.push_back(tableau.measure(q, instr_rng) ? 1 : 0);
                        }
                    }
                    break;
            }
            while (site_cursor < moment_end && plan.sites[site_cursor].instr == ii) {
                apply_site(plan.sites[site_cursor], site_cursor);
                site_cursor++;
            }
        }
        if (check_invariants && tableau.num_rows() != computational) {
            throw std::logic_error("generator count diverged from computational device count");
        }
    }
    if (static_cast<int32_t>(result.records.size()) != circuit.num_records) {
        throw std::logic_error("record count mismatch");
    }
    return result;
}

/// Batch sampling through the stabilizer engine. Shot i draws from streams
/// keyed by (master_seed, i, site), so batches are reproducible bit-exactly
/// for any execution order or thread count.
inline SampleBatch sample(const Circuit &circuit, const NoisePlan &plan, size_t shots,
                          uint64_t master_seed) {
    if (shots < 1) {
        throw std::invalid_argument("shots must be >= 1");
    }
    SampleBatch batch;
    batch.shots = shots;
    batch.num_records = circuit.num_records;
    batch.master_seed = master_seed;
    batch.records.resize(shots * circuit.num_records);
    parallel_for(shots, [&](size_t i) {
        ShotResult r = run_shot(circuit, plan, master_seed, i);
        std::copy(r.records.begin(), r.records.end(), batch.records.begin() + i * circuit.num_records);
    });
    return batch;
}

/// One shot of Pauli-frame propagation; writes num_records symbols to out.
/// The plan must be leakage-free (callers check).
inline void frame_shot_into(const Circuit &circuit, const NoisePlan &plan, uint64_t master_seed,
                            uint64_t shot, uint8_t *out) {
    const int n = circuit.num_qubits();
    std::vector<uint8_t> fx(n, 0), fz(n, 0);
    int32_t rec = 0;
    for (size_t mi = 0; mi < circuit.moments.size(); mi++) {
        size_t cursor = plan.moment_site_begin[mi];
        size_t moment_end = plan.moment_site_begin[mi + 1];
        auto apply_sites_at = [&](int32_t ii) {
            while (cursor < moment_end && plan.sites[cursor].instr == ii) {
                const NoiseSite &site = plan.sites[cursor];
                CounterRng rng(master_seed, shot, cursor);
                int code = 0;
                int arity = 1;
                if (site.kind == SiteKind::kGpc) {
                    const SamplableGpc &g = plan.gpc_pool[site.channel];
                    arity = g.gpc.arity;
                    auto sampled = detail::sample_gpc(g, 0, rng);
                    code = sampled.pauli_code;
                } else {
                    const PauliChannel &ch = plan.pauli_pool[site.channel];
                    arity = ch.arity;
                    code = detail::sample_pauli(ch, rng);
                }
                for (int t = 0; t < arity; t++) {
                    int c = (code >> (2 * t)) & 3;
                    fx[site.targets[t]] ^= c & 1;
                    fz[site.targets[t]] ^= (c >> 1) & 1;
                }
                cursor++;
            }
        };
        apply_sites_at(-1);
        const Moment &moment = circuit.moments[mi];
        for (int32_t ii = 0; ii < static_cast<int32_t>(moment.size()); ii++) {
            const Instruction &ins = moment[ii];
            switch (ins.kind) {
                case InstructionKind::kPrepZ:
                case InstructionKind::kReset:
                    for (int32_t q : ins.targets) {
                        fx[q] = fz[q] = 0;
                    }
                    break;
                case InstructionKind::kHadamard:
                    for (int32_t q : ins.targets) {
                        std::swap(fx[q], fz[q]);
                    }
                    break;
                case InstructionKind::kXGate:
                case InstructionKind::kDDX:
                    break;  // deterministic gates commute with the frame
                case InstructionKind::kCZ: {
                    int32_t a = ins.targets[0], b = ins.targets[1];
                    fz[a] ^= fx[b];
                    fz[b] ^= fx[a];
                    break;
                }
                case InstructionKind::kMeasure:
                    for (int32_t q : ins.targets) {
                        out[rec] = circuit.reference_records[rec] ^ fx[q];
                        rec++;
                    }
                    break;
            }
            apply_sites_at(ii);
        }
    }
}

/// Fast path for leakage-free models: per-shot Pauli frame propagation.
/// Rejects plans with any leakage transition mass.
inline SampleBatch pauli_frame_sample(const Circuit &circuit, const NoisePlan &plan, size_t shots,
                                      uint64_t master_seed) {
    if (shots < 1) {
        throw std::invalid_argument("shots must be >= 1");
    }
    if (plan.has_leakage) {
        throw std::invalid_argument("pauli_frame_sample requires a leakage-free noise model");
    }
    if (circuit.reference_records.size() != static_cast<size_t>(circuit.num_records)) {
        throw std::invalid_argument("circuit is missing reference records");
    }
    SampleBatch batch;
    batch.shots = shots;
    batch.num_records = circuit.num_records;
    batch.master_seed = master_seed;
    batch.records.resize(shots * circuit.num_records);
    parallel_for(shots, [&](size_t shot) {
        frame_shot_into(circuit, plan, master_seed, shot,
                        batch.records.data() + shot * circuit.num_records);
    });
    return batch;
}

/// Resamples every record through its qubit's classical readout table.
/// Leaked symbols collapse to 0 or 1 with the leaked-row probabilities.
inline SampleBatch apply_readout_error(const SampleBatch &batch, const NoisePlan &plan,
                                       const Circuit &circuit, uint64_t seed) {
    SampleBatch out = batch;
    parallel_for(batch.shots, [&](size_t shot) {
        for (int32_t r = 0; r < batch.num_records; r++) {
            int32_t q = circuit.record_qubit[r];
            const ReadoutConfusion &row = plan.confusion[q];
            uint8_t sym = batch.at(shot, r);
            CounterRng rng(seed, shot, static_cast<uint64_t>(r));
            out.at(shot, r) = rng.next_double() < row.rows[sym][1] ? 1 : 0;
        }
    });
    return out;
}

}  // namespace qeclab

#endif

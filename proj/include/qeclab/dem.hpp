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

#ifndef QECLAB_DEM_H
#define QECLAB_DEM_H

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <stdexcept>
#include <vector>

#include "qeclab/diagnostics.hpp"
#include "qeclab/noise_model.hpp"

namespace qeclab {

/// One error mechanism: the detectors it fires, whether it flips the logical
/// observable, and its probability.
struct Hyperedge {
    std::vector<int32_t> detectors;  // sorted ascending
    bool logical = false;
    double prob = 0;
};

struct ErrorHypergraph {
    int32_t num_detectors = 0;
    Basis memory_basis = Basis::kZ;
    std::vector<Basis> detector_basis;
    std::vector<DetectorId> detector_ids;
    std::vector<Hyperedge> edges;  // canonical: sorted by (detectors, logical)

    // Probability that an odd number of two independent mechanisms fire.
    static double xor_combine(double a, double b) {
        return a * (1 - b) + b * (1 - a);
    }

    // Inverse of xor_combine in its first argument: the x with
    // xor_combine(x, b) == a.
    static double xor_subtract(double a, double b) {
        return (a - b) / (1 - 2 * b);
    }

    void canonicalize() {
        auto key_less = [](const Hyperedge &a, const Hyperedge &b) {
            if (a.detectors != b.detectors) {
                return a.detectors < b.detectors;
            }
            return a.logical < b.logical;
        };
        std::sort(edges.begin(), edges.end(), key_less);
        std::vector<Hyperedge> merged;
        for (auto &e : edges) {
            if (e.prob <= 0 || e.detectors.empty()) {
                continue;
            }
            if (!merged.empty() && merged.back().detectors == e.detectors &&
                merged.back().logical == e.logical) {
                merged.back().prob = xor_combine(merged.back().prob, e.prob);
            } else {
                merged.push_back(std::move(e));
            }
        }
        edges = std::move(merged);
        for (auto &e : edges) {
            e.prob = std::min(e.prob, 0.5);
        }
    }
};

namespace detail {

// Compact per-moment action table for symbolic Pauli propagation.
struct MomentActions {
    enum Kind : uint8_t { kNoop, kH, kCZ, kMeasure, kReset };
    std::vector<Kind> kind;    // per qubit
    std::vector<int32_t> aux;  // CZ partner or record index
};

inline std::vector<MomentActions> build_action_tables(const Circuit &circuit) {
    std::vector<MomentActions> tables(circuit.moments.size());
    int32_t record = 0;
    for (size_t mi = 0; mi < circuit.moments.size(); mi++) {
        auto &t = tables[mi];
        t.kind.assign(circuit.num_qubits(), MomentActions::kNoop);
        t.aux.assign(circuit.num_qubits(), -1);
        for (const auto &ins : circuit.moments[mi]) {
            switch (ins.kind) {
                case InstructionKind::kHadamard:
                    for (int32_t q : ins.targets) {
                        t.kind[q] = MomentActions::kH;
                    }
                    break;
                case InstructionKind::kCZ:
                    t.kind[ins.targets[0]] = MomentActions::kCZ;
                    t.kind[ins.targets[1]] = MomentActions::kCZ;
                    t.aux[ins.targets[0]] = ins.targets[1];
                    t.aux[ins.targets[1]] = ins.targets[0];
                    break;
                case InstructionKind::kMeasure:
                    for (int32_t q : ins.targets) {
                        t.kind[q] = MomentActions::kMeasure;
                        t.aux[q] = record++;
                    }
                    break;
                case InstructionKind::kPrepZ:
                case InstructionKind::kReset:
                    for (int32_t q : ins.targets) {
                        t.kind[q] = MomentActions::kReset;
                    }
                    break;
                default:
                    break;
            }
        }
    }
    return tables;
}

// Sparse Pauli propagation state.
struct FaultTracer {
    const Circuit &circuit;
    std::vector<MomentActions> tables;
    std::vector<std::vector<int32_t>> detectors_of_record;
    std::vector<uint8_t> record_in_observable;

    std::vector<uint8_t> x, z;       // per qubit
    std::vector<int32_t> active;     // qubits with support
    std::vector<int32_t> flipped;    // records

    explicit FaultTracer(const Circuit &c)
        : circuit(c),
          tables(build_action_tables(c)),
          detectors_of_record(c.num_records),
          record_in_observable(c.num_records, 0),
          x(c.num_qubits(), 0),
          z(c.num_qubits(), 0) {
        for (size_t d = 0; d < c.detectors.size(); d++) {
            for (int32_t r : c.detectors[d].records) {
                detectors_of_record[r].push_back(static_cast<int32_t>(d));
            }
        }
        for (int32_t r : c.observable_records) {
            record_in_observable[r] = 1;
        }
    }

    void add_support(int32_t q, bool xe, bool ze) {
        if (!x[q] && !z[q] && (xe || ze)) {
            active.push_back(q);
        }
        x[q] ^= xe;
        z[q] ^= ze;
    }

    // Propagates a Pauli injected after instruction `instr` of `moment`
    // (instr == -1: before the moment) and returns (sorted detectors,
    // logical flip). Sign-free: only support matters.
    std::pair<std::vector<int32_t>, bool> trace(int moment, int instr,
                                                const std::vector<std::pair<int32_t, int>> &pauli) {
        for (int32_t q : active) {
            x[q] = z[q] = 0;
        }
        active.clear();
        flipped.clear();
        for (auto [q, code] : pauli) {
            add_support(q, code & 1, code & 2);
        }
        size_t first = moment;
        // A site attached after instruction `instr` cannot be touched by the
        // remainder of its own moment (disjoint targets) unless it was
        // attached before the whole moment.
        if (instr >= 0) {
            first = moment + 1;
        } else {
            apply_moment(moment);
            first = moment + 1;
        }
        for (size_t mi = first; mi < circuit.moments.size(); mi++) {
            apply_moment(mi);
            if (active.empty()) {
                break;
            }
        }
        std::vector<int32_t> fired;
        bool logical = false;
        std::sort(flipped.begin(), flipped.end());
        for (int32_t r : flipped) {
            for (int32_t d : detectors_of_record[r]) {
                fired.push_back(d);
            }
            logical ^= record_in_observable[r];
        }
        std::sort(fired.begin(), fired.end());
        // records flipping a detector twice cancel
        std::vector<int32_t> dets;
        for (size_t i = 0; i < fired.size();) {
            size_t j = i;
            while (j < fired.size() && fired[j] == fired[i]) {
                j++;
            }
            if ((j - i) % 2 == 1) {
                dets.push_back(fired[i]);
            }
            i = j;
        }
        return {std::move(dets), logical};
    }

  private:
    void apply_moment(size_t mi) {
        const auto &t = tables[mi];
        size_t out = 0;
        std::vector<int32_t> added;
        for (size_t k = 0; k < active.size(); k++) {
            int32_t q = active[k];
            if (!x[q] && !z[q]) {
                continue;
            }
            switch (t.kind[q]) {
                case MomentActions::kNoop:
                    break;
                case MomentActions::kH:
                    std::swap(x[q], z[q]);
                    break;
                case MomentActions::kCZ: {
                    int32_t other = t.aux[q];
                    if (x[q]) {
                        if (!x[other] && !z[other]) {
                            added.push_back(other);
                        }
                        z[other] ^= 1;
                        // the partner may itself appear later in `active`;
                        // its own action applies then, which is fine because
                        // CZ partners act symmetrically and only once each.
                    }
                    break;
                }
                case MomentActions::kMeasure:
                    if (x[q]) {
                        flipped.push_back(t.aux[q]);
                    }
                    break;
                case MomentActions::kReset:
                    x[q] = z[q] = 0;
                    break;
            }
            if (x[q] || z[q]) {
                active[out++] = q;
            }
        }
        active.resize(out);
        for (int32_t q : added) {
            if (x[q] || z[q]) {
                active.push_back(q);
            }
        }
    }
};

inline PauliChannel pauli_projection(const GPChannel &g) {
    PauliChannel p;
    p.arity = g.arity;
    p.probs.assign(g.arity == 1 ? 4 : 16, 0.0);
    LeakLabel comp[2] = {kComputational, kComputational};
    double leak_mass = 0;
    for (const auto &t : g.outcomes(comp)) {
        bool stays = true;
        for (int q = 0; q < g.arity; q++) {
            stays &= t.to[q] == kComputational;
        }
        if (!stays) {
            leak_mass += t.prob;
        } else if (!t.pauli.empty()) {
            for (size_t mu = 1; mu < t.pauli.size(); mu++) {
                p.probs[mu] += t.prob * t.pauli[mu];
            }
        }
    }
    // leakage mass folded into a depolarizing surrogate
    if (leak_mass > 0) {
        size_t n = p.probs.size() - 1;
        for (size_t mu = 1; mu < p.probs.size(); mu++) {
            p.probs[mu] += leak_mass / n;
        }
    }
    p.probs[0] = 0;
    return p;
}

}  // namespace detail

/// Builds the error hypergraph by propagating every elementary Pauli fault
/// of the noise plan through the circuit and binning faults by the detector
/// set they fire. Bin probabilities combine by XOR composition.
inline ErrorHypergraph dem_from_noise(const Circuit &circuit, const NoisePlan &plan) {
    ErrorHypergraph h;
    h.num_detectors = static_cast<int32_t>(circuit.detectors.size());
    h.memory_basis = circuit.basis;
    for (int32_t d = 0; d < h.num_detectors; d++) {
        h.detector_basis.push_back(circuit.detector_basis(d));
        h.detector_ids.push_back(circuit.detectors[d].id);
    }

    detail::FaultTracer tracer(circuit);
    std::map<std::pair<std::vector<int32_t>, bool>, double> bins;
    auto deposit = [&](std::vector<int32_t> dets, bool logical, double prob) {
        if (prob <= 0) {
            return;
        }
        if (dets.empty()) {
            if (logical) {
                throw std::logic_error("undetectable logical fault in the noise model");
            }
            return;
        }
        auto key = std::make_pair(std::move(dets), logical);
        auto [it, inserted] = bins.emplace(std::move(key), prob);
        if (!inserted) {
            it->second = ErrorHypergraph::xor_combine(it->second, prob);
        }
    };

    for (const auto &site : plan.sites) {
        PauliChannel channel;
        if (site.kind == SiteKind::kGpc) {
            channel = detail::pauli_projection(plan.gpc_pool[site.channel].gpc);
        } else {
            channel = plan.pauli_pool[site.channel];
        }
        for (size_t code = 1; code < channel.probs.size(); code++) {
            if (channel.probs[code] <= 0) {
                continue;
            }
            std::vector<std::pair<int32_t, int>> pauli;
            for (int t = 0; t < channel.arity; t++) {
                int c = (code >> (2 * t)) & 3;
                if (c) {
                    pauli.push_back({site.targets[t], c});
                }
            }
            auto [dets, logical] = tracer.trace(site.moment, site.instr, pauli);
            deposit(std::move(dets), logical, channel.probs[code]);
        }
    }
    // classical readout confusion: single-record flips
    for (int32_t r = 0; r < circuit.num_records; r++) {
        const auto &rows = plan.confusion.empty()
                               ? readout_confusion(0, 0)
                               : plan.confusion[circuit.record_qubit[r]];
        double flip = (rows.rows[0][1] + rows.rows[1][0]) / 2;
        if (flip <= 0) {
            continue;
        }
        std::vector<int32_t> dets = tracer.detectors_of_record[r];
        std::sort(dets.begin(), dets.end());
        deposit(std::move(dets), tracer.record_in_observable[r], flip);
    }

    for (auto &[key, prob] : bins) {
        h.edges.push_back({key.first, key.second, prob});
    }
    h.canonicalize();
    return h;
}

struct PijCalibrationReport {
    size_t clamped = 0;      // negative estimates raised to the floor/minimum
    size_t fallbacks = 0;    // solver failures, ansatz prior kept
    size_t oversized = 0;    // edges beyond the cluster solver's reach
};

/// Recalibrates the ansatz hypergraph from detection-event correlations:
/// highest-order cluster probabilities first, then lower orders with the
/// already-assigned higher-order contributions subtracted out. One-body and
/// spacelike two-body entries are floored.
inline ErrorHypergraph dem_from_pij(const ErrorHypergraph &ansatz, const DetectionMatrix &m,
                                    double floor_prob, PijCalibrationReport *report = nullptr) {
    if (ansatz.num_detectors != m.num_detectors) {
        throw std::invalid_argument("ansatz and detection matrix disagree on detectors");
    }
    PijCalibrationReport local;
    ErrorHypergraph out = ansatz;

    // Order edge indices by decreasing size.
    std::vector<size_t> order(out.edges.size());
    for (size_t i = 0; i < order.size(); i++) {
        order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return out.edges[a].detectors.size() > out.edges[b].detectors.size();
    });

    // Raw estimates feed the subtraction of lower orders; floors only touch
    // the emitted probabilities, otherwise a floored-up entry would
    // over-subtract from everything beneath it.
    std::vector<double> raw(out.edges.size(), 0.0);
    std::vector<uint8_t> estimated(out.edges.size(), 0);
    std::vector<double> means(m.num_detectors);
    for (int32_t d = 0; d < m.num_detectors; d++) {
        means[d] = static_cast<double>(m.count(d)) / m.shots;
    }

    auto is_superset = [](const std::vector<int32_t> &big, const std::vector<int32_t> &small) {
        return std::includes(big.begin(), big.end(), small.begin(), small.end());
    };

    for (size_t oi : order) {
        Hyperedge &e = out.edges[oi];
        size_t k = e.detectors.size();
        double measured;
        if (k > 5) {
            local.oversized++;
            raw[oi] = e.prob;
            estimated[oi] = 1;
            continue;  // keep ansatz prior
        }
        try {
            if (k == 1) {
                measured = means[e.detectors[0]];
            } else {
                measured = cluster_prob(m, e.detectors);
            }
        } catch (const std::runtime_error &) {
            local.fallbacks++;
            raw[oi] = e.prob;
            estimated[oi] = 1;
            continue;
        }
        // subtract the already-estimated strictly larger mechanisms that
        // contain this detector set
        double higher = 0;
        for (size_t oj = 0; oj < out.edges.size(); oj++) {
            if (oj == oi || !estimated[oj]) {
                continue;
            }
            if (out.edges[oj].detectors.size() > k &&
                is_superset(out.edges[oj].detectors, e.detectors)) {
                higher = ErrorHypergraph::xor_combine(higher, raw[oj]);
            }
        }
        double value = ErrorHypergraph::xor_subtract(measured, higher);
        raw[oi] = std::clamp(value, 0.0, 0.5);
        bool spacelike_pair = false;
        if (k == 2) {
            const DetectorId &a = out.detector_ids[e.detectors[0]];
            const DetectorId &b = out.detector_ids[e.detectors[1]];
            spacelike_pair = a.round == b.round;
        }
        double min_allowed = (k == 1 || spacelike_pair) ? floor_prob : 1e-12;
        if (value < min_allowed) {
            local.clamped++;
            value = min_allowed;
        }
        e.prob = std::min(value, 0.5);
        estimated[oi] = 1;
    }
    out.canonicalize();
    if (report) {
        *report = local;
    }
    return out;
}

// ---- decomposition into per-basis matching graphs

struct MatchingEdge {
    int32_t u = 0;
    int32_t v = 0;  // == boundary node index for boundary edges
    double prob = 0;
    double weight = 0;
    bool logical = false;
    std::vector<int32_t> source_edges;  // hyperedge indices
};

struct MatchingGraph {
    Basis basis = Basis::kZ;
    std::vector<int32_t> global_of_local;  // local node -> detector index
    std::vector<int32_t> local_of_global;  // detector index -> local node or -1
    std::vector<MatchingEdge> edges;
    std::vector<std::vector<int32_t>> adjacency;  // per node incl boundary

    int32_t num_nodes() const {  // without boundary
        return static_cast<int32_t>(global_of_local.size());
    }
    int32_t boundary() const {
        return num_nodes();
    }

    // all-pairs cache over nodes + boundary
    bool cache_built = false;
    std::vector<double> dist;
    std::vector<uint8_t> parity;
    std::vector<int32_t> pred;  // predecessor edge index

    void finish_edges() {
        adjacency.assign(num_nodes() + 1, {});
        for (size_t i = 0; i < edges.size(); i++) {
            adjacency[edges[i].u].push_back(static_cast<int32_t>(i));
            if (edges[i].v != edges[i].u) {
                adjacency[edges[i].v].push_back(static_cast<int32_t>(i));
            }
        }
    }

    // Dijkstra from a source over nodes incl boundary; deterministic.
    void dijkstra(int32_t source, std::vector<double> &d, std::vector<uint8_t> &par,
                  std::vector<int32_t> &pe) const {
        int32_t n = num_nodes() + 1;
        d.assign(n, std::numeric_limits<double>::infinity());
        par.assign(n, 0);
        pe.assign(n, -1);
        using Item = std::pair<double, int32_t>;
        std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
        d[source] = 0;
        pq.push({0, source});
        std::vector<uint8_t> settled(n, 0);
        while (!pq.empty()) {
            auto [du, u] = pq.top();
            pq.pop();
            if (settled[u]) {
                continue;
            }
            settled[u] = 1;
            for (int32_t ei : adjacency[u]) {
                const MatchingEdge &e = edges[ei];
                int32_t v = e.u == u ? e.v : e.u;
                double nd = du + e.weight;
                if (nd < d[v]) {
                    d[v] = nd;
                    par[v] = par[u] ^ e.logical;
                    pe[v] = ei;
                    pq.push({nd, v});
                }
            }
        }
    }

    void build_cache() {
        int32_t n = num_nodes() + 1;
        dist.assign(static_cast<size_t>(n) * n, 0);
        parity.assign(static_cast<size_t>(n) * n, 0);
        pred.assign(static_cast<size_t>(n) * n, -1);
        std::vector<double> d;
        std::vector<uint8_t> par;
        std::vector<int32_t> pe;
        for (int32_t s = 0; s < n; s++) {
            dijkstra(s, d, par, pe);
            std::copy(d.begin(), d.end(), dist.begin() + static_cast<size_t>(s) * n);
            std::copy(par.begin(), par.end(), parity.begin() + static_cast<size_t>(s) * n);
            std::copy(pe.begin(), pe.end(), pred.begin() + static_cast<size_t>(s) * n);
        }
        cache_built = true;
    }
};

/// Splits the hypergraph into the two per-basis error graphs. Every
/// hyperedge contributes its basis-restricted edge to each graph; single
/// detectors become boundary edges. The logical flip bit is carried by the
/// memory-basis edge.
inline std::pair<MatchingGraph, MatchingGraph> decompose(const ErrorHypergraph &h) {
    MatchingGraph gx, gz;
    gx.basis = Basis::kX;
    gz.basis = Basis::kZ;
    for (MatchingGraph *g : {&gx, &gz}) {
        g->local_of_global.assign(h.num_detectors, -1);
    }
    for (int32_t d = 0; d < h.num_detectors; d++) {
        MatchingGraph &g = h.detector_basis[d] == Basis::kX ? gx : gz;
        g.local_of_global[d] = static_cast<int32_t>(g.global_of_local.size());
        g.global_of_local.push_back(d);
    }

    // merge parallel restricted edges keyed by (u, v, logical)
    std::map<std::tuple<int32_t, int32_t, bool>, std::pair<double, std::vector<int32_t>>> acc[2];
    for (size_t ei = 0; ei < h.edges.size(); ei++) {
        const Hyperedge &e = h.edges[ei];
        std::vector<int32_t> split[2];
        for (int32_t d : e.detectors) {
            split[h.detector_basis[d] == Basis::kX ? 0 : 1].push_back(d);
        }
        for (int side = 0; side < 2; side++) {
            MatchingGraph &g = side == 0 ? gx : gz;
            auto &dets = split[side];
            if (dets.size() > 2) {
                throw std::invalid_argument(
                    "hyperedge with more than two same-basis detectors is undecomposable");
            }
            bool logical = e.logical && g.basis == h.memory_basis;
            if (dets.empty()) {
                if (logical) {
                    throw std::invalid_argument(
                        "logical-flipping hyperedge with no memory-basis detector");
                }
                continue;
            }
            int32_t u = g.local_of_global[dets[0]];
            int32_t v = dets.size() == 2 ? g.local_of_global[dets[1]] : g.boundary();
            if (u > v) {
                std::swap(u, v);
            }
            auto &slot = acc[side][{u, v, logical}];
            slot.first = ErrorHypergraph::xor_combine(slot.first, e.prob);
            slot.second.push_back(static_cast<int32_t>(ei));
        }
    }
    for (int side = 0; side < 2; side++) {
        MatchingGraph &g = side == 0 ? gx : gz;
        for (auto &[key, val] : acc[side]) {
            MatchingEdge edge;
            edge.u = std::get<0>(key);
            edge.v = std::get<1>(key);
            edge.logical = std::get<2>(key);
            edge.prob = val.first;
            double p = std::clamp(val.first, 1e-12, 0.5 - 1e-12);
            edge.weight = std::log((1 - p) / p);
            edge.source_edges = std::move(val.second);
            g.edges.push_back(std::move(edge));
        }
        g.finish_edges();
    }
    return {std::move(gx), std::move(gz)};
}

}  // namespace qeclab

#endif

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

#include "qeclab/dem.hpp"

#include <queue>

#include "gtest/gtest.h"
#include "qeclab/edges.hpp"
#include "qeclab/simulator.hpp"
#include "synthetic.hpp"

using namespace qeclab;

namespace {

NoisePlan plan_for(const Circuit &c, ComponentRates rates, NoiseMode mode = NoiseMode::kPauli) {
    return build_noise_model(rates, mode).assign(c);
}

// Single deterministic fault: returns (fired detectors, logical flip) via
// the frame simulator, an independent path from the symbolic tracer.
std::pair<std::vector<int32_t>, bool> simulate_fault(const Circuit &c, const NoiseSite &site,
                                                     const PauliChannel &channel, int code) {
    NoisePlan plan = plan_for(c, ComponentRates::zero());
    PauliChannel forced;
    forced.arity = channel.arity;
    forced.probs.assign(channel.probs.size(), 0.0);
    forced.probs[code] = 1.0;
    plan.pauli_pool.push_back(forced);
    NoiseSite s = site;
    s.kind = forced.arity == 1 ? SiteKind::kPauli1 : SiteKind::kPauli2;
    s.channel = static_cast<int32_t>(plan.pauli_pool.size() - 1);
    plan.sites = {s};
    plan.moment_site_begin.assign(c.moments.size() + 1, 0);
    for (size_t m = 0; m <= c.moments.size(); m++) {
        plan.moment_site_begin[m] = static_cast<int32_t>(m) > s.moment ? 1 : 0;
    }
    auto m = detections(pauli_frame_sample(c, plan, 1, 3), c);
    std::vector<int32_t> fired;
    for (int32_t d = 0; d < m.num_detectors; d++) {
        if (m.get(0, d)) {
            fired.push_back(d);
        }
    }
    return {fired, m.observable_flip(0)};
}

}  // namespace

TEST(Dem, ZeroNoiseGivesEmptyHypergraph) {
    auto layout = surface_layout(3);
    auto c = build_memory_circuit(layout, Basis::kZ, 2, {22, 9});
    auto h = dem_from_noise(c, plan_for(c, ComponentRates::zero()));
    EXPECT_TRUE(h.edges.empty());
    EXPECT_EQ(h.num_detectors, static_cast<int32_t>(c.detectors.size()));
}

TEST(Dem, MeasurementFlipNoiseGivesTimelikePairs) {
    auto layout = repetition_layout(3);
    auto c = build_memory_circuit(layout, Basis::kZ, 2, {0, 3});
    ComponentRates rates = ComponentRates::zero();
    rates.readout = 0.01;
    auto plan = plan_for(c, rates);
    // flips on measure-qubit records only
    for (int32_t q = 0; q < c.num_qubits(); q++) {
        if (layout.is_data(c.qubits[q])) {
            plan.confusion[q] = readout_confusion(0, 0);
        }
    }
    auto h = dem_from_noise(c, plan);
    ASSERT_FALSE(h.edges.empty());
    for (const auto &e : h.edges) {
        ASSERT_EQ(e.detectors.size(), 2u);
        DetectorId a = h.detector_ids[e.detectors[0]];
        DetectorId b = h.detector_ids[e.detectors[1]];
        EXPECT_EQ(a.stabilizer_index, b.stabilizer_index);
        EXPECT_EQ(std::abs(a.round - b.round), 1);
        EXPECT_NEAR(e.prob, 0.01, 1e-12);
        EXPECT_FALSE(e.logical);
    }
    EXPECT_GE(h.edges.size(), 4u);
}

// Every elementary fault's detector signature from the symbolic tracer must
// match a direct frame-simulation of that fault.
TEST(Dem, TracerMatchesSimulatedFaults) {
    auto layout = surface_layout(3);
    for (Basis basis : {Basis::kZ, Basis::kX}) {
        auto c = build_memory_circuit(layout, basis, 3, {22, 9});
        ComponentRates rates;
        auto plan = plan_for(c, rates);

        detail::FaultTracer tracer(c);
        size_t checked = 0;
        for (size_t si = 0; si < plan.sites.size(); si += 5) {
            const auto &site = plan.sites[si];
            const PauliChannel &ch = plan.pauli_pool[site.channel];
            for (size_t code = 1; code < ch.probs.size(); code += 3) {
                if (ch.probs[code] <= 0) {
                    continue;
                }
                std::vector<std::pair<int32_t, int>> pauli;
                for (int t = 0; t < ch.arity; t++) {
                    int cc = (code >> (2 * t)) & 3;
                    if (cc) {
                        pauli.push_back({site.targets[t], cc});
                    }
                }
                auto traced = tracer.trace(site.moment, site.instr, pauli);
                auto simulated = simulate_fault(c, site, ch, static_cast<int>(code));
                EXPECT_EQ(traced.first, simulated.first)
                    << "site at moment " << site.moment << " code " << code;
                EXPECT_EQ(traced.second, simulated.second);
                checked++;
            }
        }
        EXPECT_GT(checked, 80u);
    }
}

TEST(Dem, MergeAlgebra) {
    double a = 0.01, b = 0.03, c = 0.2;
    double ab = ErrorHypergraph::xor_combine(a, b);
    EXPECT_NEAR(ab, ErrorHypergraph::xor_combine(b, a), 1e-15);
    EXPECT_NEAR(ErrorHypergraph::xor_combine(ab, c),
                ErrorHypergraph::xor_combine(a, ErrorHypergraph::xor_combine(b, c)), 1e-12);
    EXPECT_NEAR(ErrorHypergraph::xor_subtract(ab, b), a, 1e-12);
}

TEST(Dem, CanonicalizeMergesDuplicates) {
    ErrorHypergraph h;
    h.num_detectors = 3;
    h.detector_basis = {Basis::kZ, Basis::kZ, Basis::kZ};
    h.detector_ids = {{0, 0}, {0, 1}, {0, 2}};
    h.edges.push_back({{0, 1}, false, 0.1});
    h.edges.push_back({{0, 1}, false, 0.2});
    h.edges.push_back({{0, 1}, true, 0.05});
    h.edges.push_back({{2}, false, 0.0});
    h.canonicalize();
    ASSERT_EQ(h.edges.size(), 2u);
    EXPECT_NEAR(h.edges[0].prob, 0.1 * 0.8 + 0.2 * 0.9, 1e-12);
    EXPECT_FALSE(h.edges[0].logical);
    EXPECT_TRUE(h.edges[1].logical);
}

TEST(Dem, CalibrationRoundTrip) {
    ErrorHypergraph ansatz;
    ansatz.num_detectors = 6;
    ansatz.memory_basis = Basis::kZ;
    ansatz.detector_basis.assign(6, Basis::kZ);
    for (int d = 0; d < 6; d++) {
        ansatz.detector_ids.push_back({d, 0});  // distinct rounds: no floors
    }
    ansatz.edges = {
        {{0}, false, 0.02},          {{1}, false, 0.015},        {{2}, false, 0.03},
        {{3}, false, 0.01},          {{4}, false, 0.02},         {{5}, false, 0.025},
        {{0, 1}, false, 0.05},       {{2, 3}, true, 0.04},       {{1, 2, 4}, false, 0.03},
        {{2, 3, 4, 5}, false, 0.02},
    };
    ansatz.canonicalize();

    std::vector<synthetic::Process> procs;
    for (const auto &e : ansatz.edges) {
        procs.push_back({e.detectors, e.prob, e.logical});
    }
    auto m = synthetic::sample_processes(6, procs, 1000000, 77);
    ErrorHypergraph prior = ansatz;
    for (auto &e : prior.edges) {
        e.prob = 0.01;  // forget the truth; keep only the structure
    }
    PijCalibrationReport report;
    auto calibrated = dem_from_pij(prior, m, 1e-6, &report);
    ASSERT_EQ(calibrated.edges.size(), ansatz.edges.size());
    for (size_t i = 0; i < ansatz.edges.size(); i++) {
        EXPECT_EQ(calibrated.edges[i].detectors, ansatz.edges[i].detectors);
        EXPECT_NEAR(calibrated.edges[i].prob, ansatz.edges[i].prob,
                    0.10 * ansatz.edges[i].prob + 0.004)
            << "edge " << i;
    }
    EXPECT_EQ(report.fallbacks, 0u);
}

TEST(Dem, CalibrationFloorSemantics) {
    ErrorHypergraph ansatz;
    ansatz.num_detectors = 2;
    ansatz.memory_basis = Basis::kZ;
    ansatz.detector_basis.assign(2, Basis::kZ);
    ansatz.detector_ids = {{3, 0}, {3, 1}};  // same round: spacelike pair
    ansatz.edges = {{{0}, false, 0.001}, {{1}, false, 0.001}, {{0, 1}, false, 0.001}};

    std::vector<synthetic::Process> procs = {{{0}, 0.02, false}, {{1}, 0.02, false}};
    auto m = synthetic::sample_processes(2, procs, 400000, 3);
    auto calibrated = dem_from_pij(ansatz, m, 0.01);
    for (const auto &e : calibrated.edges) {
        if (e.detectors.size() == 2) {
            EXPECT_NEAR(e.prob, 0.01, 1e-9);  // floored
        } else {
            EXPECT_NEAR(e.prob, 0.02, 0.002);
        }
    }
}

TEST(Dem, DecomposeSplitsByBasis) {
    ErrorHypergraph h;
    h.num_detectors = 4;
    h.memory_basis = Basis::kZ;
    h.detector_basis = {Basis::kX, Basis::kX, Basis::kZ, Basis::kZ};
    h.detector_ids = {{0, 0}, {1, 1}, {0, 2}, {1, 3}};
    h.edges = {
        {{0, 1}, false, 0.01},        // pure X-graph edge
        {{2, 3}, true, 0.02},         // pure Z-graph edge with logical flip
        {{0, 1, 2, 3}, true, 0.005},  // Y-like: one edge in each graph
        {{2}, false, 0.03},           // boundary edge
    };
    auto [gx, gz] = decompose(h);
    EXPECT_EQ(gx.num_nodes(), 2);
    EXPECT_EQ(gz.num_nodes(), 2);
    ASSERT_EQ(gx.edges.size(), 1u);  // the two X-side pairs merge (same logical)
    ASSERT_EQ(gz.edges.size(), 2u);  // merged logical pair + boundary edge
    EXPECT_NEAR(gx.edges[0].prob, ErrorHypergraph::xor_combine(0.01, 0.005), 1e-12);
    for (const auto &e : gx.edges) {
        EXPECT_FALSE(e.logical);
    }
    int logical_edges = 0;
    for (const auto &e : gz.edges) {
        logical_edges += e.logical;
        if (e.logical) {
            EXPECT_NEAR(e.prob, ErrorHypergraph::xor_combine(0.02, 0.005), 1e-12);
        }
    }
    EXPECT_EQ(logical_edges, 1);

    ErrorHypergraph bad = h;
    bad.detector_basis[2] = Basis::kX;
    bad.edges.push_back({{0, 1, 2}, false, 0.01});
    EXPECT_THROW(decompose(bad), std::invalid_argument);

    ErrorHypergraph empty;
    empty.num_detectors = 0;
    auto [ex, ez] = decompose(empty);
    EXPECT_TRUE(ex.edges.empty());
    EXPECT_TRUE(ez.edges.empty());
}

TEST(Dem, PauliProjectionFoldsLeakage) {
    GPChannel leak;
    leak.arity = 1;
    leak.transitions.assign(3, {});
    leak.transitions[0].push_back({{0, 0}, 0.9, 1, {0.97, 0.01, 0.01, 0.01}});
    leak.transitions[0].push_back({{1, 0}, 0.1, 0, {}});
    leak.transitions[1].push_back({{1, 0}, 1.0, 0, {}});
    leak.transitions[2].push_back({{2, 0}, 1.0, 0, {}});
    auto p = detail::pauli_projection(leak);
    EXPECT_NEAR(p.probs[1], 0.9 * 0.01 + 0.1 / 3, 1e-12);
    EXPECT_NEAR(p.total(), 0.9 * 0.03 + 0.1, 1e-12);
}

namespace {

// Parity-aware shortest paths: distance from a source to every (node,
// logical parity) state, unit edge cost.
void dijkstra2(const MatchingGraph &g, int32_t source,
               std::vector<std::array<double, 2>> &dist) {
    int32_t n = g.num_nodes() + 1;
    dist.assign(n, {std::numeric_limits<double>::infinity(),
                    std::numeric_limits<double>::infinity()});
    using Item = std::pair<double, int32_t>;  // state = node * 2 + parity
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    dist[source][0] = 0;
    pq.push({0, source * 2});
    while (!pq.empty()) {
        auto [du, state] = pq.top();
        pq.pop();
        int32_t u = state / 2, par = state % 2;
        if (du > dist[u][par]) {
            continue;
        }
        for (int32_t ei : g.adjacency[u]) {
            const MatchingEdge &e = g.edges[ei];
            int32_t v = e.u == u ? e.v : e.u;
            int np = par ^ e.logical;
            if (du + 1 < dist[v][np]) {
                dist[v][np] = du + 1;
                pq.push({du + 1, v * 2 + np});
            }
        }
    }
}

// Minimum number of elementary faults whose syndrome equals `fired` within
// one basis graph and whose total logical parity equals `target`.
double min_completion(const MatchingGraph &g, const std::vector<int32_t> &fired, bool target) {
    std::vector<std::array<double, 2>> from_a, from_b, from_boundary;
    dijkstra2(g, g.boundary(), from_boundary);
    if (fired.empty()) {
        return target ? from_boundary[g.boundary()][1] : 0.0;
    }
    if (fired.size() == 1) {
        dijkstra2(g, fired[0], from_a);
        return from_a[g.boundary()][target];
    }
    dijkstra2(g, fired[0], from_a);
    dijkstra2(g, fired[1], from_b);
    double direct = from_a[fired[1]][target];
    double via_boundary = std::min(from_a[g.boundary()][0] + from_b[g.boundary()][target],
                                   from_a[g.boundary()][1] + from_b[g.boundary()][target ^ 1]);
    return std::min(direct, via_boundary);
}

}  // namespace

// Hook safety: a single fault on a weight-4 stabilizer's measure qubit after
// its second CZ must need at least ceil(d/2) additional elementary faults to
// complete into an undetected logical error.
TEST(Dem, HookErrorsAreSafe) {
    for (int d : {3, 5}) {
        auto layout = surface_layout(d);
        for (Basis basis : {Basis::kZ, Basis::kX}) {
            auto c = build_memory_circuit(layout, basis, 4, {0, d * d});
            ComponentRates uniform;
            auto h = dem_from_noise(c, plan_for(c, uniform));
            for (auto &e : h.edges) {
                e.prob = 0.01;  // unit-cost faults
            }
            auto [gx, gz] = decompose(h);
            const MatchingGraph &memory_graph = basis == Basis::kX ? gx : gz;
            const MatchingGraph &other_graph = basis == Basis::kX ? gz : gx;

            // locate the second CZ layer of cycle 2
            int cz_moments_seen = 0, target_moment = -1;
            int measures_seen = 0;
            for (size_t m = 0; m < c.moments.size(); m++) {
                bool has_cz = false, has_measure = false;
                for (const auto &ins : c.moments[m]) {
                    has_cz |= ins.kind == InstructionKind::kCZ;
                    has_measure |= ins.kind == InstructionKind::kMeasure;
                }
                if (has_cz && measures_seen == 1) {
                    cz_moments_seen++;
                    if (cz_moments_seen == 3) {
                        target_moment = static_cast<int>(m);
                        break;
                    }
                }
                if (has_measure) {
                    measures_seen++;
                }
            }
            ASSERT_GT(target_moment, 0);

            for (const auto &stab : layout.stabilizers) {
                if (stab.weight() != 4) {
                    continue;
                }
                int32_t mq = c.qubit_id(stab.measure_qubit);
                for (int code : {1, 3}) {  // X and Y on the measure qubit
                    PauliChannel ch = pauli1(1, 0, 0);
                    auto [fired, flip] = simulate_fault(
                        c, {target_moment, -1, SiteKind::kPauli1, 0, {mq, -1}}, ch, code);
                    std::vector<int32_t> fired_mem, fired_other;
                    for (int32_t det : fired) {
                        if (memory_graph.local_of_global[det] >= 0) {
                            fired_mem.push_back(memory_graph.local_of_global[det]);
                        } else {
                            fired_other.push_back(other_graph.local_of_global[det]);
                        }
                    }
                    ASSERT_LE(fired_mem.size(), 2u);
                    ASSERT_LE(fired_other.size(), 2u);
                    double cost = min_completion(memory_graph, fired_mem, !flip) +
                                  min_completion(other_graph, fired_other, false);
                    EXPECT_GE(cost, std::ceil(d / 2.0))
                        << "hook on stabilizer at " << coord_str(stab.measure_qubit) << " code "
                        << code << " basis " << basis_char(basis);
                }
            }
        }
    }
}

TEST(Dem, EdgeClassifierTaxonomy) {
    auto layout = surface_layout(3);
    auto c = build_memory_circuit(layout, Basis::kZ, 3, {0, 9});
    EdgeClassifier classifier(layout, c);
    EXPECT_EQ(classifier.classify({1, 0}, {2, 0}), EdgeClass::kT);
    int x0 = -1, x1 = -1, z0 = -1, z1 = -1;
    for (size_t i = 0; i < layout.stabilizers.size(); i++) {
        for (size_t j = i + 1; j < layout.stabilizers.size(); j++) {
            const auto &a = layout.stabilizers[i];
            const auto &b = layout.stabilizers[j];
            bool share = false;
            for (auto qa : a.support) {
                for (auto qb : b.support) {
                    share |= qa == qb;
                }
            }
            if (!share || a.basis != b.basis) {
                continue;
            }
            if (a.basis == Basis::kX && x0 < 0) {
                x0 = static_cast<int>(i);
                x1 = static_cast<int>(j);
            }
            if (a.basis == Basis::kZ && z0 < 0) {
                z0 = static_cast<int>(i);
                z1 = static_cast<int>(j);
            }
        }
    }
    ASSERT_GE(x0, 0);
    ASSERT_GE(z0, 0);
    EXPECT_EQ(classifier.classify({1, x0}, {1, x1}), EdgeClass::kSX);
    EXPECT_EQ(classifier.classify({1, z0}, {1, z1}), EdgeClass::kSZ);
    EXPECT_EQ(classifier.classify({0, 0}, {2, 0}), EdgeClass::kSTPrime);
}

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

#ifndef QECLAB_DECODERS_H
#define QECLAB_DECODERS_H

#include <bit>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "qeclab/dem.hpp"
#include "qeclab/matching.hpp"
#include "qeclab/threading.hpp"

namespace qeclab {

struct BPConfig {
    enum class Schedule : uint8_t { kSerial, kParallel };
    enum class Rule : uint8_t { kTanh, kMinSum };
    Schedule schedule = Schedule::kSerial;
    Rule rule = Rule::kTanh;
    int max_iters = 5;
    double minsum_scale = 0.7;

    void validate() const {
        if (max_iters < 0 || minsum_scale <= 0 || minsum_scale > 1) {
            throw std::invalid_argument("invalid BP configuration");
        }
    }
};

struct DecodeResult {
    bool flip = false;
    std::vector<int32_t> matched_edges;  // matching-graph edges used (when collected)
};

enum class DecoderKind : uint8_t {
    kMwpm,
    kCorrelatedMwpm,
    kBeliefMatching,
    kMaximumLikelihood,
};

struct DecoderSpec {
    DecoderKind kind = DecoderKind::kCorrelatedMwpm;
    BPConfig bp;
};

/// Minimum-weight perfect matching decode of one basis graph. Fired nodes
/// are matched pairwise or to private boundary copies; the logical flip is
/// the parity of the logical bits along the matched shortest paths.
inline DecodeResult mwpm(const MatchingGraph &g, const std::vector<int32_t> &fired,
                         bool collect_edges = false) {
    DecodeResult result;
    const int f = static_cast<int>(fired.size());
    if (f == 0) {
        return result;
    }
    const int32_t n_all = g.num_nodes() + 1;
    // distance/parity/pred rows per fired node
    std::vector<const double *> dist_rows(f);
    std::vector<const uint8_t *> par_rows(f);
    std::vector<const int32_t *> pred_rows(f);
    std::vector<std::vector<double>> local_dist;
    std::vector<std::vector<uint8_t>> local_par;
    std::vector<std::vector<int32_t>> local_pred;
    if (g.cache_built) {
        for (int i = 0; i < f; i++) {
            dist_rows[i] = g.dist.data() + static_cast<size_t>(fired[i]) * n_all;
            par_rows[i] = g.parity.data() + static_cast<size_t>(fired[i]) * n_all;
            pred_rows[i] = g.pred.data() + static_cast<size_t>(fired[i]) * n_all;
        }
    } else {
        local_dist.resize(f);
        local_par.resize(f);
        local_pred.resize(f);
        for (int i = 0; i < f; i++) {
            g.dijkstra(fired[i], local_dist[i], local_par[i], local_pred[i]);
            dist_rows[i] = local_dist[i].data();
            par_rows[i] = local_par[i].data();
            pred_rows[i] = local_pred[i].data();
        }
    }
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> w(2 * f, std::vector<double>(2 * f, inf));
    for (int i = 0; i < f; i++) {
        for (int j = i + 1; j < f; j++) {
            w[i][j] = w[j][i] = dist_rows[i][fired[j]];
        }
        w[i][f + i] = w[f + i][i] = dist_rows[i][g.boundary()];
    }
    for (int i = f; i < 2 * f; i++) {
        for (int j = i + 1; j < 2 * f; j++) {
            w[i][j] = w[j][i] = 0.0;
        }
    }
    std::vector<int> mate;
    try {
        mate = min_weight_perfect_matching(w);
    } catch (const std::runtime_error &) {
        throw std::runtime_error("fired detector has no path to a partner or the boundary");
    }
    auto walk_path = [&](int i, int32_t target) {
        // walk predecessors from target back to fired[i]
        int32_t v = target;
        while (v != fired[i]) {
            int32_t ei = pred_rows[i][v];
            if (ei < 0) {
                throw std::logic_error("broken shortest-path chain");
            }
            result.matched_edges.push_back(ei);
            const MatchingEdge &e = g.edges[ei];
            v = (e.u == v) ? e.v : e.u;
        }
    };
    for (int i = 0; i < f; i++) {
        int j = mate[i];
        if (j < f) {
            if (j > i) {
                result.flip ^= par_rows[i][fired[j]];
                if (collect_edges) {
                    walk_path(i, fired[j]);
                }
            }
        } else {
            result.flip ^= par_rows[i][g.boundary()];
            if (collect_edges) {
                walk_path(i, g.boundary());
            }
        }
    }
    return result;
}

/// Sum-product (or min-sum) posteriors over the error hypergraph's Tanner
/// graph given a syndrome; returns per-hyperedge posterior probabilities.
inline std::vector<double> belief_propagate(const ErrorHypergraph &h,
                                            const std::vector<uint8_t> &syndrome,
                                            const BPConfig &cfg) {
    cfg.validate();
    const size_t n_vars = h.edges.size();
    const int32_t n_checks = h.num_detectors;

    std::vector<double> prior_llr(n_vars);
    for (size_t v = 0; v < n_vars; v++) {
        double p = std::clamp(h.edges[v].prob, 1e-12, 0.5);
        prior_llr[v] = std::log((1 - p) / p);
    }
    // incidence: per check, list of (var, slot); slots flat-array messages
    std::vector<std::vector<std::pair<int32_t, int32_t>>> check_vars(n_checks);
    std::vector<int32_t> var_of_slot;
    for (size_t v = 0; v < n_vars; v++) {
        for (int32_t d : h.edges[v].detectors) {
            check_vars[d].push_back({static_cast<int32_t>(v),
                                     static_cast<int32_t>(var_of_slot.size())});
            var_of_slot.push_back(static_cast<int32_t>(v));
        }
    }
    std::vector<double> c2v(var_of_slot.size(), 0.0);
    std::vector<double> total = prior_llr;

    auto check_update = [&](int32_t c, std::vector<double> &new_msgs) {
        const auto &vars = check_vars[c];
        const size_t deg = vars.size();
        new_msgs.resize(deg);
        double sign_all = syndrome[c] ? -1.0 : 1.0;
        if (cfg.rule == BPConfig::Rule::kTanh) {
            // prefix/suffix products of tanh(V/2)
            std::vector<double> t(deg);
            for (size_t k = 0; k < deg; k++) {
                double v_in = std::clamp(total[vars[k].first] - c2v[vars[k].second], -40.0, 40.0);
                t[k] = std::tanh(v_in / 2);
            }
            std::vector<double> pre(deg + 1, 1.0), suf(deg + 1, 1.0);
            for (size_t k = 0; k < deg; k++) {
                pre[k + 1] = pre[k] * t[k];
            }
            for (size_t k = deg; k-- > 0;) {
                suf[k] = suf[k + 1] * t[k];
            }
            for (size_t k = 0; k < deg; k++) {
                double prod = std::clamp(pre[k] * suf[k + 1], -1 + 1e-12, 1 - 1e-12);
                new_msgs[k] = sign_all * 2 * std::atanh(prod);
            }
        } else {
            std::vector<double> mag(deg);
            std::vector<double> sgn(deg);
            for (size_t k = 0; k < deg; k++) {
                double v_in = total[vars[k].first] - c2v[vars[k].second];
                mag[k] = std::abs(v_in);
                sgn[k] = v_in < 0 ? -1.0 : 1.0;
            }
            for (size_t k = 0; k < deg; k++) {
                double m = std::numeric_limits<double>::infinity();
                double s = 1.0;
                for (size_t t = 0; t < deg; t++) {
                    if (t == k) {
                        continue;
                    }
                    m = std::min(m, mag[t]);
                    s *= sgn[t];
                }
                if (deg == 1) {
                    m = std::numeric_limits<double>::infinity();
                }
                new_msgs[k] = sign_all * cfg.minsum_scale * s * std::min(m, 1e9);
            }
        }
    };

    std::vector<double> new_msgs;
    for (int iter = 0; iter < cfg.max_iters; iter++) {
        double max_change = 0;
        if (cfg.schedule == BPConfig::Schedule::kSerial) {
            for (int32_t c = 0; c < n_checks; c++) {
                if (check_vars[c].empty()) {
                    continue;
                }
                check_update(c, new_msgs);
                for (size_t k = 0; k < check_vars[c].size(); k++) {
                    auto [v, slot] = check_vars[c][k];
                    max_change = std::max(max_change, std::abs(new_msgs[k] - c2v[slot]));
                    total[v] += new_msgs[k] - c2v[slot];
                    c2v[slot] = new_msgs[k];
                }
            }
        } else {
            std::vector<double> next_c2v(c2v.size());
            for (int32_t c = 0; c < n_checks; c++) {
                if (check_vars[c].empty()) {
                    continue;
                }
                check_update(c, new_msgs);
                for (size_t k = 0; k < check_vars[c].size(); k++) {
                    next_c2v[check_vars[c][k].second] = new_msgs[k];
                }
            }
            for (size_t s = 0; s < c2v.size(); s++) {
                max_change = std::max(max_change, std::abs(next_c2v[s] - c2v[s]));
            }
            c2v = std::move(next_c2v);
            total = prior_llr;
            for (size_t s = 0; s < c2v.size(); s++) {
                total[var_of_slot[s]] += c2v[s];
            }
        }
        if (max_change < 1e-6) {
            break;
        }
    }
    std::vector<double> posterior(n_vars);
    for (size_t v = 0; v < n_vars; v++) {
        posterior[v] = 1.0 / (1.0 + std::exp(std::clamp(total[v], -700.0, 700.0)));
    }
    return posterior;
}

/// Exact maximum-likelihood decode by enumerating all error subsets
/// consistent with the syndrome (GF(2) solution space); returns the heavier
/// logical class, ties resolving to no flip.
inline DecodeResult ml_decode(const ErrorHypergraph &h, const std::vector<uint8_t> &syndrome) {
    const size_t n_edges = h.edges.size();
    if (n_edges > 30) {
        throw std::invalid_argument("maximum-likelihood enumeration capped at 30 hyperedges");
    }
    // rows: detectors as bitmasks over edges
    std::vector<uint64_t> row(h.num_detectors, 0);
    uint64_t logical_mask = 0;
    for (size_t e = 0; e < n_edges; e++) {
        for (int32_t d : h.edges[e].detectors) {
            row[d] |= 1ull << e;
        }
        if (h.edges[e].logical) {
            logical_mask |= 1ull << e;
        }
    }
    // eliminate: for each pivot edge column, reduce
    std::vector<uint64_t> rows;
    std::vector<uint8_t> rhs;
    for (int32_t d = 0; d < h.num_detectors; d++) {
        if (row[d]) {
            rows.push_back(row[d]);
            rhs.push_back(syndrome[d]);
        } else if (syndrome[d]) {
            throw std::runtime_error("syndrome outside the hypergraph span");
        }
    }
    std::vector<int> pivot_col;
    size_t r = 0;
    for (size_t col = 0; col < n_edges && r < rows.size(); col++) {
        size_t sel = r;
        while (sel < rows.size() && !((rows[sel] >> col) & 1)) {
            sel++;
        }
        if (sel == rows.size()) {
            continue;
        }
        std::swap(rows[r], rows[sel]);
        std::swap(rhs[r], rhs[sel]);
        for (size_t i = 0; i < rows.size(); i++) {
            if (i != r && ((rows[i] >> col) & 1)) {
                rows[i] ^= rows[r];
                rhs[i] ^= rhs[r];
            }
        }
        pivot_col.push_back(static_cast<int>(col));
        r++;
    }
    for (size_t i = r; i < rows.size(); i++) {
        if (rhs[i]) {
            throw std::runtime_error("syndrome outside the hypergraph span");
        }
    }
    // particular solution
    uint64_t x0 = 0;
    for (size_t i = 0; i < r; i++) {
        if (rhs[i]) {
            x0 |= 1ull << pivot_col[i];
        }
    }
    // nullspace basis: one vector per free column
    std::vector<uint64_t> basis;
    std::vector<uint8_t> is_pivot(n_edges, 0);
    for (int c : pivot_col) {
        is_pivot[c] = 1;
    }
    for (size_t col = 0; col < n_edges; col++) {
        if (is_pivot[col]) {
            continue;
        }
        uint64_t vec = 1ull << col;
        for (size_t i = 0; i < r; i++) {
            if ((rows[i] >> col) & 1) {
                vec |= 1ull << pivot_col[i];
            }
        }
        basis.push_back(vec);
    }
    if (basis.size() > 24) {
        throw std::invalid_argument("maximum-likelihood solution space too large to enumerate");
    }
    // Gray-code walk over the solution coset
    std::vector<double> odds(n_edges);
    double base_prob = 1.0;
    for (size_t e = 0; e < n_edges; e++) {
        double p = std::clamp(h.edges[e].prob, 1e-15, 1 - 1e-15);
        base_prob *= ((x0 >> e) & 1) ? p : (1 - p);
        odds[e] = p / (1 - p);
    }
    double class_sum[2] = {0, 0};
    uint64_t x = x0;
    double prob = base_prob;
    int logical = std::popcount(x & logical_mask) & 1;
    class_sum[logical] += prob;
    const uint64_t count = 1ull << basis.size();
    for (uint64_t g = 1; g < count; g++) {
        int flip_basis = std::countr_zero(g);
        uint64_t toggled = basis[flip_basis];
        while (toggled) {
            int e = std::countr_zero(toggled);
            toggled &= toggled - 1;
            prob *= ((x >> e) & 1) ? 1.0 / odds[e] : odds[e];
            x ^= 1ull << e;
        }
        logical = std::popcount(x & logical_mask) & 1;
        class_sum[logical] += prob;
    }
    DecodeResult result;
    result.flip = class_sum[1] > class_sum[0];
    return result;
}

/// Prebuilt decoder for one hypergraph; decode() is pure and thread-safe.
class Decoder {
  public:
    Decoder(ErrorHypergraph h, DecoderSpec spec) : h_(std::move(h)), spec_(spec) {
        if (spec_.kind != DecoderKind::kMaximumLikelihood) {
            std::tie(gx_, gz_) = decompose(h_);
            if (spec_.kind != DecoderKind::kBeliefMatching) {
                gx_.build_cache();
                gz_.build_cache();
            }
        }
        if (spec_.kind == DecoderKind::kCorrelatedMwpm) {
            partners_x_.resize(h_.edges.size());
            partners_z_.resize(h_.edges.size());
            for (size_t ei = 0; ei < gx_.edges.size(); ei++) {
                for (int32_t src : gx_.edges[ei].source_edges) {
                    partners_x_[src].push_back(static_cast<int32_t>(ei));
                }
            }
            for (size_t ei = 0; ei < gz_.edges.size(); ei++) {
                for (int32_t src : gz_.edges[ei].source_edges) {
                    partners_z_[src].push_back(static_cast<int32_t>(ei));
                }
            }
        }
    }

    const ErrorHypergraph &hypergraph() const {
        return h_;
    }
    const MatchingGraph &graph(Basis b) const {
        return b == Basis::kX ? gx_ : gz_;
    }

    DecodeResult decode(const std::vector<uint8_t> &syndrome) const {
        switch (spec_.kind) {
            case DecoderKind::kMwpm: {
                DecodeResult rx = mwpm(gx_, fired_of(gx_, syndrome));
                DecodeResult rz = mwpm(gz_, fired_of(gz_, syndrome));
                return {static_cast<bool>(rx.flip ^ rz.flip), {}};
            }
            case DecoderKind::kCorrelatedMwpm:
                return decode_correlated(syndrome);
            case DecoderKind::kBeliefMatching:
                return decode_belief(syndrome);
            case DecoderKind::kMaximumLikelihood:
                return ml_decode(h_, syndrome);
        }
        return {};
    }

  private:
    static std::vector<int32_t> fired_of(const MatchingGraph &g,
                                         const std::vector<uint8_t> &syndrome) {
        std::vector<int32_t> fired;
        for (int32_t local = 0; local < g.num_nodes(); local++) {
            if (syndrome[g.global_of_local[local]]) {
                fired.push_back(local);
            }
        }
        return fired;
    }

    DecodeResult decode_correlated(const std::vector<uint8_t> &syndrome) const {
        auto fired_x = fired_of(gx_, syndrome);
        auto fired_z = fired_of(gz_, syndrome);
        DecodeResult first_x = mwpm(gx_, fired_x, true);
        DecodeResult first_z = mwpm(gz_, fired_z, true);

        // Hyperedges used by the first pass of the other graph make their
        // partner edges cheaper: p -> p / (p + (1-p) r) with r the prior
        // odds of the joint mechanism.
        auto reweight = [&](const MatchingGraph &g,
                            const std::vector<std::vector<int32_t>> &partners,
                            const DecodeResult &other_pass,
                            const MatchingGraph &other_graph) {
            MatchingGraph out = g;
            out.cache_built = false;
            std::set<int32_t> used_hyper;
            for (int32_t ei : other_pass.matched_edges) {
                for (int32_t src : other_graph.edges[ei].source_edges) {
                    used_hyper.insert(src);
                }
            }
            for (int32_t src : used_hyper) {
                double q = h_.edges[src].prob;
                double odds = q / (1 - q);
                for (int32_t ei : partners[src]) {
                    double p = out.edges[ei].prob;
                    double updated = p / (p + (1 - p) * odds);
                    out.edges[ei].prob = updated;
                    double clamped = std::clamp(updated, 1e-12, 0.5 - 1e-12);
                    out.edges[ei].weight = std::log((1 - clamped) / clamped);
                }
            }
            return out;
        };
        MatchingGraph gx2 = reweight(gx_, partners_x_, first_z, gz_);
        MatchingGraph gz2 = reweight(gz_, partners_z_, first_x, gx_);
        DecodeResult rx = mwpm(gx2, fired_x);
        DecodeResult rz = mwpm(gz2, fired_z);
        return {static_cast<bool>(rx.flip ^ rz.flip), {}};
    }

    DecodeResult decode_belief(const std::vector<uint8_t> &syndrome) const {
        std::vector<double> posterior = belief_propagate(h_, syndrome, spec_.bp);
        ErrorHypergraph reweighted = h_;
        for (size_t e = 0; e < reweighted.edges.size(); e++) {
            reweighted.edges[e].prob = std::clamp(posterior[e], 1e-12, 0.5);
        }
        auto [gx, gz] = decompose(reweighted);
        DecodeResult rx = mwpm(gx, fired_of(gx, syndrome));
        DecodeResult rz = mwpm(gz, fired_of(gz, syndrome));
        return {static_cast<bool>(rx.flip ^ rz.flip), {}};
    }

    ErrorHypergraph h_;
    DecoderSpec spec_;
    MatchingGraph gx_, gz_;
    std::vector<std::vector<int32_t>> partners_x_, partners_z_;
};

struct LogicalErrorEstimate {
    size_t shots = 0;
    size_t errors = 0;
    double p_l = 0;
    double sigma = 0;

    double fidelity() const {
        return 1 - 2 * p_l;
    }
};

/// Decodes every shot and compares the predicted flip against the measured
/// observable flip; p_L is the disagreement fraction.
inline LogicalErrorEstimate logical_error_rate(const DetectionMatrix &m, const Decoder &decoder) {
    std::vector<uint8_t> wrong(m.shots, 0);
    parallel_for(m.shots, [&](size_t shot) {
        std::vector<uint8_t> syndrome(m.num_detectors, 0);
        for (int32_t d = 0; d < m.num_detectors; d++) {
            syndrome[d] = m.get(shot, d);
        }
        DecodeResult r = decoder.decode(syndrome);
        wrong[shot] = r.flip != m.observable_flip(shot);
    });
    LogicalErrorEstimate est;
    est.shots = m.shots;
    for (uint8_t w : wrong) {
        est.errors += w;
    }
    est.p_l = static_cast<double>(est.errors) / m.shots;
    est.sigma = std::sqrt(std::max(est.p_l * (1 - est.p_l), 1e-12) / m.shots);
    return est;
}

}  // namespace qeclab

#endif

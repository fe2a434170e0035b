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

#ifndef QECLAB_MATCHING_H
#define QECLAB_MATCHING_H

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace qeclab {

/// Maximum-weight maximum-cardinality matching on a general graph by the
/// primal-dual blossom method (Galil's formulation, following van Rantwijk's
/// reference implementation). Integer weights; O(n^3).
class MaxWeightMatcher {
  public:
    static constexpr int kNone = -1;

    explicit MaxWeightMatcher(int n)
        : n_(n),
          cap_(2 * n),
          weight_(static_cast<size_t>(n) * n, 0),
          has_edge_(static_cast<size_t>(n) * n, 0) {
    }

    void add_edge(int v, int w, int64_t wt) {
        weight_[v * n_ + w] = wt;
        weight_[w * n_ + v] = wt;
        has_edge_[v * n_ + w] = 1;
        has_edge_[w * n_ + v] = 1;
    }

    /// Runs the matching; mate[v] == kNone for unmatched vertices.
    std::vector<int> solve() {
        mate_.assign(n_, kNone);
        label_.assign(cap_, 0);
        label_edge_.assign(cap_, {kNone, kNone});
        in_blossom_.resize(n_);
        for (int v = 0; v < n_; v++) {
            in_blossom_[v] = v;
        }
        parent_.assign(cap_, kNone);
        base_.resize(cap_);
        for (int v = 0; v < n_; v++) {
            base_[v] = v;
        }
        int64_t max_weight = 0;
        for (int v = 0; v < n_; v++) {
            for (int w = 0; w < n_; w++) {
                if (has_edge_[v * n_ + w]) {
                    max_weight = std::max(max_weight, weight_[v * n_ + w]);
                }
            }
        }
        dual_.assign(cap_, 0);
        for (int v = 0; v < n_; v++) {
            dual_[v] = max_weight;
        }
        alive_blossom_.assign(cap_, 0);
        childs_.assign(cap_, {});
        edges_.assign(cap_, {});
        best_edges_.assign(cap_, {});
        has_best_edges_.assign(cap_, 0);
        best_edge_.assign(cap_, {kNone, kNone});
        allow_.assign(static_cast<size_t>(n_) * n_, 0);
        free_blossoms_.clear();
        for (int b = cap_ - 1; b >= n_; b--) {
            free_blossoms_.push_back(b);
        }

        while (run_stage()) {
        }
        return mate_;
    }

    /// Checks the complementary-slackness certificate of optimality
    /// (meaningful right after solve, for integer weights).
    bool verify_optimum() const {
        int64_t min_dual = std::numeric_limits<int64_t>::max();
        for (int v = 0; v < n_; v++) {
            min_dual = std::min(min_dual, dual_[v]);
        }
        int64_t offset = std::max<int64_t>(0, -min_dual);
        for (int v = 0; v < n_; v++) {
            if (dual_[v] + offset < 0) {
                return false;
            }
        }
        for (int b = n_; b < cap_; b++) {
            if (alive_blossom_[b] && dual_[b] < 0) {
                return false;
            }
        }
        for (int i = 0; i < n_; i++) {
            for (int j = i + 1; j < n_; j++) {
                if (!has_edge_[i * n_ + j]) {
                    continue;
                }
                int64_t s = dual_[i] + dual_[j] - 2 * weight_[i * n_ + j];
                std::vector<int> ib{i}, jb{j};
                while (parent_[ib.back()] != kNone) {
                    ib.push_back(parent_[ib.back()]);
                }
                while (parent_[jb.back()] != kNone) {
                    jb.push_back(parent_[jb.back()]);
                }
                std::reverse(ib.begin(), ib.end());
                std::reverse(jb.begin(), jb.end());
                for (size_t k = 0; k < std::min(ib.size(), jb.size()); k++) {
                    if (ib[k] != jb[k]) {
                        break;
                    }
                    if (ib[k] >= n_) {
                        s += 2 * dual_[ib[k]];
                    }
                }
                if (s < 0) {
                    return false;
                }
                if (mate_[i] == j && s != 0) {
                    return false;
                }
            }
        }
        for (int v = 0; v < n_; v++) {
            if (mate_[v] == kNone && dual_[v] + offset != 0) {
                return false;
            }
        }
        for (int b = n_; b < cap_; b++) {
            if (alive_blossom_[b] && dual_[b] > 0) {
                if (edges_[b].size() % 2 != 1) {
                    return false;
                }
                for (size_t k = 1; k < edges_[b].size(); k += 2) {
                    if (mate_[edges_[b][k].first] != edges_[b][k].second) {
                        return false;
                    }
                }
            }
        }
        return true;
    }

  private:
    bool is_blossom(int b) const {
        return b >= n_;
    }

    int64_t slack(int v, int w) const {
        return dual_[v] + dual_[w] - 2 * weight_[v * n_ + w];
    }

    void leaves_of(int b, std::vector<int> &out) const {
        if (!is_blossom(b)) {
            out.push_back(b);
            return;
        }
        for (int t : childs_[b]) {
            leaves_of(t, out);
        }
    }

    void assign_label(int w, int t, int v) {
        int b = in_blossom_[w];
        label_[w] = label_[b] = t;
        if (v != kNone) {
            label_edge_[w] = label_edge_[b] = {v, w};
        } else {
            label_edge_[w] = label_edge_[b] = {kNone, kNone};
        }
        best_edge_[w] = best_edge_[b] = {kNone, kNone};
        if (t == 1) {
            std::vector<int> ls;
            leaves_of(b, ls);
            for (int x : ls) {
                queue_.push_back(x);
            }
        } else if (t == 2) {
            int bb = base_[b];
            assign_label(mate_[bb], 1, bb);
        }
    }

    int scan_blossom(int v, int w) {
        std::vector<int> path;
        int found_base = kNone;
        while (v != kNone) {
            int b = in_blossom_[v];
            if (label_[b] & 4) {
                found_base = base_[b];
                break;
            }
            path.push_back(b);
            label_[b] = 5;
            if (label_edge_[b].first == kNone) {
                v = kNone;
            } else {
                v = label_edge_[b].first;
                b = in_blossom_[v];
                v = label_edge_[b].first;
            }
            if (w != kNone) {
                std::swap(v, w);
            }
        }
        for (int b : path) {
            label_[b] = 1;
        }
        return found_base;
    }

    void add_blossom(int blossom_base, int v, int w) {
        int bb = in_blossom_[blossom_base];
        int bv = in_blossom_[v];
        int bw = in_blossom_[w];
        if (free_blossoms_.empty()) {
            throw std::logic_error("blossom id pool exhausted");
        }
        int b = free_blossoms_.back();
        free_blossoms_.pop_back();
        alive_blossom_[b] = 1;
        base_[b] = blossom_base;
        parent_[b] = kNone;
        parent_[bb] = b;
        childs_[b].clear();
        edges_[b].clear();
        edges_[b].push_back({v, w});
        while (bv != bb) {
            parent_[bv] = b;
            childs_[b].push_back(bv);
            edges_[b].push_back(label_edge_[bv]);
            v = label_edge_[bv].first;
            bv = in_blossom_[v];
        }
        childs_[b].push_back(bb);
        std::reverse(childs_[b].begin(), childs_[b].end());
        std::reverse(edges_[b].begin(), edges_[b].end());
        while (bw != bb) {
            parent_[bw] = b;
            childs_[b].push_back(bw);
            edges_[b].push_back({label_edge_[bw].second, label_edge_[bw].first});
            w = label_edge_[bw].first;
            bw = in_blossom_[w];
        }
        label_[b] = 1;
        label_edge_[b] = label_edge_[bb];
        dual_[b] = 0;
        std::vector<int> ls;
        leaves_of(b, ls);
        for (int x : ls) {
            if (label_[in_blossom_[x]] == 2) {
                queue_.push_back(x);
            }
            in_blossom_[x] = b;
        }
        // Compute least-slack edges to neighbouring S-blossoms.
        std::vector<std::pair<int, int>> best_to(cap_, {kNone, kNone});
        for (int bc : childs_[b]) {
            std::vector<std::pair<int, int>> nblist;
            if (is_blossom(bc) && has_best_edges_[bc]) {
                nblist = best_edges_[bc];
                best_edges_[bc].clear();
                has_best_edges_[bc] = 0;
            } else {
                std::vector<int> sub;
                leaves_of(bc, sub);
                for (int x : sub) {
                    for (int y = 0; y < n_; y++) {
                        if (y != x && has_edge_[x * n_ + y]) {
                            nblist.push_back({x, y});
                        }
                    }
                }
            }
            for (auto [i, j] : nblist) {
                if (in_blossom_[j] == b) {
                    std::swap(i, j);
                }
                int bj = in_blossom_[j];
                if (bj != b && label_[bj] == 1 &&
                    (best_to[bj].first == kNone ||
                     slack(i, j) < slack(best_to[bj].first, best_to[bj].second))) {
                    best_to[bj] = {i, j};
                }
            }
            best_edge_[bc] = {kNone, kNone};
        }
        best_edges_[b].clear();
        for (int x = 0; x < cap_; x++) {
            if (best_to[x].first != kNone) {
                best_edges_[b].push_back(best_to[x]);
            }
        }
        has_best_edges_[b] = 1;
        best_edge_[b] = {kNone, kNone};
        for (const auto &k : best_edges_[b]) {
            if (best_edge_[b].first == kNone ||
                slack(k.first, k.second) < slack(best_edge_[b].first, best_edge_[b].second)) {
                best_edge_[b] = k;
            }
        }
    }

    int wrap_child(int b, int j) const {
        int len = static_cast<int>(childs_[b].size());
        return childs_[b][((j % len) + len) % len];
    }
    std::pair<int, int> wrap_edge(int b, int j) const {
        int len = static_cast<int>(edges_[b].size());
        return edges_[b][((j % len) + len) % len];
    }

    void expand_blossom(int b, bool endstage) {
        for (int s : childs_[b]) {
            parent_[s] = kNone;
            if (!is_blossom(s)) {
                in_blossom_[s] = s;
            } else if (endstage && dual_[s] == 0) {
                expand_blossom(s, endstage);
            } else {
                std::vector<int> ls;
                leaves_of(s, ls);
                for (int x : ls) {
                    in_blossom_[x] = s;
                }
            }
        }
        if (!endstage && label_[b] == 2) {
            int entry_child = in_blossom_[label_edge_[b].second];
            int j = static_cast<int>(std::find(childs_[b].begin(), childs_[b].end(), entry_child) -
                                     childs_[b].begin());
            int jstep;
            if (j & 1) {
                j -= static_cast<int>(childs_[b].size());
                jstep = 1;
            } else {
                jstep = -1;
            }
            int v = label_edge_[b].first, w = label_edge_[b].second;
            while (j != 0) {
                int p, q;
                if (jstep == 1) {
                    std::tie(p, q) = wrap_edge(b, j);
                } else {
                    std::tie(q, p) = wrap_edge(b, j - 1);
                }
                label_[w] = 0;
                label_[q] = 0;
                assign_label(w, 2, v);
                set_allowed(p, q, true);
                j += jstep;
                if (jstep == 1) {
                    std::tie(v, w) = wrap_edge(b, j);
                } else {
                    std::tie(w, v) = wrap_edge(b, j - 1);
                }
                set_allowed(v, w, true);
                j += jstep;
            }
            int bw = wrap_child(b, j);
            label_[w] = label_[bw] = 2;
            label_edge_[w] = label_edge_[bw] = {v, w};
            best_edge_[bw] = {kNone, kNone};
            j += jstep;
            while (wrap_child(b, j) != entry_child) {
                int bv = wrap_child(b, j);
                if (label_[bv] == 1) {
                    j += jstep;
                    continue;
                }
                int reach = kNone;
                if (is_blossom(bv)) {
                    std::vector<int> ls;
                    leaves_of(bv, ls);
                    for (int x : ls) {
                        if (label_[x]) {
                            reach = x;
                            break;
                        }
                    }
                } else if (label_[bv]) {
                    reach = bv;
                }
                if (reach != kNone) {
                    label_[reach] = 0;
                    label_[mate_[base_[bv]]] = 0;
                    assign_label(reach, 2, label_edge_[reach].first);
                }
                j += jstep;
            }
        }
        label_[b] = 0;
        label_edge_[b] = {kNone, kNone};
        best_edge_[b] = {kNone, kNone};
        alive_blossom_[b] = 0;
        childs_[b].clear();
        edges_[b].clear();
        best_edges_[b].clear();
        has_best_edges_[b] = 0;
        free_blossoms_.push_back(b);
    }

    void augment_blossom(int b, int v) {
        int t = v;
        while (parent_[t] != b) {
            t = parent_[t];
        }
        if (is_blossom(t)) {
            augment_blossom(t, v);
        }
        int i = static_cast<int>(std::find(childs_[b].begin(), childs_[b].end(), t) -
                                 childs_[b].begin());
        int j = i, jstep;
        if (i & 1) {
            j -= static_cast<int>(childs_[b].size());
            jstep = 1;
        } else {
            jstep = -1;
        }
        while (j != 0) {
            j += jstep;
            int tc = wrap_child(b, j);
            int w, x;
            if (jstep == 1) {
                std::tie(w, x) = wrap_edge(b, j);
            } else {
                std::tie(x, w) = wrap_edge(b, j - 1);
            }
            if (is_blossom(tc)) {
                augment_blossom(tc, w);
            }
            j += jstep;
            tc = wrap_child(b, j);
            if (is_blossom(tc)) {
                augment_blossom(tc, x);
            }
            mate_[w] = x;
            mate_[x] = w;
        }
        std::rotate(childs_[b].begin(), childs_[b].begin() + i, childs_[b].end());
        std::rotate(edges_[b].begin(), edges_[b].begin() + i, edges_[b].end());
        base_[b] = base_[childs_[b][0]];
    }

    void augment_matching(int v, int w) {
        std::pair<int, int> pairs[2] = {{v, w}, {w, v}};
        for (auto [s, j] : pairs) {
            while (true) {
                int bs = in_blossom_[s];
                if (is_blossom(bs)) {
                    augment_blossom(bs, s);
                }
                mate_[s] = j;
                if (label_edge_[bs].first == kNone) {
                    break;
                }
                int t = label_edge_[bs].first;
                int bt = in_blossom_[t];
                s = label_edge_[bt].first;
                j = label_edge_[bt].second;
                if (is_blossom(bt)) {
                    augment_blossom(bt, j);
                }
                mate_[j] = s;
            }
        }
    }

    bool allowed(int v, int w) const {
        return allow_[v * n_ + w];
    }
    void set_allowed(int v, int w, bool a) {
        allow_[v * n_ + w] = a;
        allow_[w * n_ + v] = a;
    }

    bool run_stage() {
        std::fill(label_.begin(), label_.end(), 0);
        std::fill(label_edge_.begin(), label_edge_.end(), std::pair<int, int>{kNone, kNone});
        std::fill(best_edge_.begin(), best_edge_.end(), std::pair<int, int>{kNone, kNone});
        for (int b = n_; b < cap_; b++) {
            best_edges_[b].clear();
            has_best_edges_[b] = 0;
        }
        std::fill(allow_.begin(), allow_.end(), 0);
        queue_.clear();
        for (int v = 0; v < n_; v++) {
            if (mate_[v] == kNone && label_[in_blossom_[v]] == 0) {
                assign_label(v, 1, kNone);
            }
        }
        bool augmented = false;
        while (true) {
            while (!queue_.empty() && !augmented) {
                int v = queue_.back();
                queue_.pop_back();
                for (int w = 0; w < n_; w++) {
                    if (w == v || !has_edge_[v * n_ + w]) {
                        continue;
                    }
                    int bv = in_blossom_[v], bw = in_blossom_[w];
                    if (bv == bw) {
                        continue;
                    }
                    int64_t kslack = 0;
                    if (!allowed(v, w)) {
                        kslack = slack(v, w);
                        if (kslack <= 0) {
                            set_allowed(v, w, true);
                        }
                    }
                    if (allowed(v, w)) {
                        if (label_[bw] == 0) {
                            assign_label(w, 2, v);
                        } else if (label_[bw] == 1) {
                            int blossom_base = scan_blossom(v, w);
                            if (blossom_base != kNone) {
                                add_blossom(blossom_base, v, w);
                            } else {
                                augment_matching(v, w);
                                augmented = true;
                                break;
                            }
                        } else if (label_[w] == 0) {
                            label_[w] = 2;
                            label_edge_[w] = {v, w};
                        }
                    } else if (label_[bw] == 1) {
                        if (best_edge_[bv].first == kNone ||
                            kslack < slack(best_edge_[bv].first, best_edge_[bv].second)) {
                            best_edge_[bv] = {v, w};
                        }
                    } else if (label_[w] == 0) {
                        if (best_edge_[w].first == kNone ||
                            kslack < slack(best_edge_[w].first, best_edge_[w].second)) {
                            best_edge_[w] = {v, w};
                        }
                    }
                }
            }
            if (augmented) {
                break;
            }
            // Dual adjustment. Only max-cardinality mode is supported, so
            // delta1 is not considered until no other move exists.
            int delta_type = -1;
            int64_t delta = 0;
            std::pair<int, int> delta_edge{kNone, kNone};
            int delta_blossom = kNone;
            for (int v = 0; v < n_; v++) {
                if (label_[in_blossom_[v]] == 0 && best_edge_[v].first != kNone) {
                    int64_t d = slack(best_edge_[v].first, best_edge_[v].second);
                    if (delta_type == -1 || d < delta) {
                        delta = d;
                        delta_type = 2;
                        delta_edge = best_edge_[v];
                    }
                }
            }
            for (int b = 0; b < cap_; b++) {
                if ((b < n_ || alive_blossom_[b]) && parent_[b] == kNone && label_[b] == 1 &&
                    best_edge_[b].first != kNone) {
                    int64_t d = slack(best_edge_[b].first, best_edge_[b].second) / 2;
                    if (delta_type == -1 || d < delta) {
                        delta = d;
                        delta_type = 3;
                        delta_edge = best_edge_[b];
                    }
                }
            }
            for (int b = n_; b < cap_; b++) {
                if (alive_blossom_[b] && parent_[b] == kNone && label_[b] == 2 &&
                    (delta_type == -1 || dual_[b] < delta)) {
                    delta = dual_[b];
                    delta_type = 4;
                    delta_blossom = b;
                }
            }
            if (delta_type == -1) {
                delta_type = 1;
                int64_t min_dual = std::numeric_limits<int64_t>::max();
                for (int v = 0; v < n_; v++) {
                    min_dual = std::min(min_dual, dual_[v]);
                }
                delta = std::max<int64_t>(0, min_dual);
            }
            for (int v = 0; v < n_; v++) {
                int l = label_[in_blossom_[v]];
                if (l == 1) {
                    dual_[v] -= delta;
                } else if (l == 2) {
                    dual_[v] += delta;
                }
            }
            for (int b = n_; b < cap_; b++) {
                if (alive_blossom_[b] && parent_[b] == kNone) {
                    if (label_[b] == 1) {
                        dual_[b] += delta;
                    } else if (label_[b] == 2) {
                        dual_[b] -= delta;
                    }
                }
            }
            if (delta_type == 1) {
                break;
            } else if (delta_type == 2) {
                set_allowed(delta_edge.first, delta_edge.second, true);
                queue_.push_back(delta_edge.first);
            } else if (delta_type == 3) {
                set_allowed(delta_edge.first, delta_edge.second, true);
                queue_.push_back(delta_edge.first);
            } else if (delta_type == 4) {
                expand_blossom(delta_blossom, false);
            }
        }
        if (!augmented) {
            return false;
        }
        for (int b = n_; b < cap_; b++) {
            if (alive_blossom_[b] && parent_[b] == kNone && label_[b] == 1 && dual_[b] == 0) {
                expand_blossom(b, true);
            }
        }
        return true;
    }

    int n_, cap_;
    std::vector<int64_t> weight_;
    std::vector<uint8_t> has_edge_;
    std::vector<int> mate_, label_, in_blossom_, parent_, base_;
    std::vector<std::pair<int, int>> label_edge_, best_edge_;
    std::vector<int64_t> dual_;
    std::vector<uint8_t> alive_blossom_, has_best_edges_;
    std::vector<std::vector<int>> childs_;
    std::vector<std::vector<std::pair<int, int>>> edges_;
    std::vector<std::vector<std::pair<int, int>>> best_edges_;
    std::vector<uint8_t> allow_;
    std::vector<int> queue_;
    std::vector<int> free_blossoms_;
};

/// Minimum-weight perfect matching over a dense weight matrix (double
/// weights quantized at 2^-20); infinities mark forbidden pairs. Throws when
/// no perfect matching over allowed pairs exists.
inline std::vector<int> min_weight_perfect_matching(const std::vector<std::vector<double>> &w) {
    const int n = static_cast<int>(w.size());
    if (n % 2 != 0) {
        throw std::invalid_argument("perfect matching needs an even node count");
    }
    if (n == 0) {
        return {};
    }
    const double scale = double(1 << 20);
    MaxWeightMatcher matcher(n);
    for (int i = 0; i < n; i++) {
        for (int j = i + 1; j < n; j++) {
            if (std::isfinite(w[i][j])) {
                matcher.add_edge(i, j, -std::llround(w[i][j] * scale));
            }
        }
    }
    auto mate = matcher.solve();
    for (int i = 0; i < n; i++) {
        if (mate[i] < 0) {
            throw std::runtime_error("no perfect matching over allowed pairs");
        }
    }
    return mate;
}

}  // namespace qeclab

#endif

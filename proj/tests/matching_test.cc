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

#include "qeclab/matching.hpp"

#include <functional>
#include <random>

#include "gtest/gtest.h"

using namespace qeclab;

namespace {

// Exhaustive minimum over all perfect pairings (n <= 12).
double brute_force_min(const std::vector<std::vector<double>> &w) {
    int n = static_cast<int>(w.size());
    std::vector<int> nodes(n);
    for (int i = 0; i < n; i++) {
        nodes[i] = i;
    }
    double best = std::numeric_limits<double>::infinity();
    std::function<void(std::vector<int> &, double)> rec = [&](std::vector<int> &rest,
                                                              double acc) {
        if (rest.empty()) {
            best = std::min(best, acc);
            return;
        }
        int a = rest[0];
        for (size_t k = 1; k < rest.size(); k++) {
            int b = rest[k];
            if (!std::isfinite(w[a][b])) {
                continue;
            }
            std::vector<int> next;
            for (size_t t = 1; t < rest.size(); t++) {
                if (t != k) {
                    next.push_back(rest[t]);
                }
            }
            rec(next, acc + w[a][b]);
        }
    };
    rec(nodes, 0.0);
    return best;
}

double matching_weight(const std::vector<std::vector<double>> &w, const std::vector<int> &mate) {
    double total = 0;
    for (size_t i = 0; i < mate.size(); i++) {
        if (static_cast<int>(i) < mate[i]) {
            total += w[i][mate[i]];
        }
    }
    return total;
}

void check_instance(const std::vector<std::vector<double>> &w) {
    auto mate = min_weight_perfect_matching(w);
    for (size_t i = 0; i < w.size(); i++) {
        ASSERT_GE(mate[i], 0);
        ASSERT_EQ(mate[mate[i]], static_cast<int>(i));
        ASSERT_NE(mate[i], static_cast<int>(i));
    }
    double got = matching_weight(w, mate);
    double best = brute_force_min(w);
    EXPECT_NEAR(got, best, 1e-5) << "matching is not optimal";
}

std::vector<std::vector<double>> random_instance(int n, int kind, std::mt19937_64 &gen) {
    std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
    std::uniform_int_distribution<int> small(0, 4);
    std::uniform_real_distribution<double> real(0.0, 10.0);
    std::uniform_real_distribution<double> wide(-5.0, 15.0);
    for (int i = 0; i < n; i++) {
        for (int j = i + 1; j < n; j++) {
            double v = 0;
            switch (kind) {
                case 0: v = small(gen); break;  // heavy ties
                case 1: v = real(gen); break;   // generic
                case 2: v = wide(gen); break;   // negative weights
                default: v = small(gen) * 2.5; break;
            }
            w[i][j] = w[j][i] = v;
        }
    }
    return w;
}

}  // namespace

TEST(Matching, TrivialPairs) {
    std::vector<std::vector<double>> w = {{0, 3}, {3, 0}};
    auto mate = min_weight_perfect_matching(w);
    EXPECT_EQ(mate[0], 1);
    EXPECT_EQ(mate[1], 0);

    std::vector<std::vector<double>> w4 = {
        {0, 1, 10, 10}, {1, 0, 10, 10}, {10, 10, 0, 2}, {10, 10, 2, 0}};
    mate = min_weight_perfect_matching(w4);
    EXPECT_EQ(mate[0], 1);
    EXPECT_EQ(mate[2], 3);
}

TEST(Matching, OddSizeRejected) {
    std::vector<std::vector<double>> w(3, std::vector<double>(3, 1.0));
    EXPECT_THROW(min_weight_perfect_matching(w), std::invalid_argument);
}

TEST(Matching, RandomAgainstBruteForce) {
    std::mt19937_64 gen(12345);
    for (int n : {2, 4, 6, 8, 10}) {
        for (int kind = 0; kind < 4; kind++) {
            for (int rep = 0; rep < 120; rep++) {
                auto w = random_instance(n, kind, gen);
                check_instance(w);
            }
        }
    }
}

TEST(Matching, BruteForceWithForbiddenPairs) {
    std::mt19937_64 gen(777);
    std::bernoulli_distribution forbid(0.25);
    for (int n : {4, 6, 8, 10}) {
        for (int rep = 0; rep < 150; rep++) {
            auto w = random_instance(n, 1, gen);
            for (int i = 0; i < n; i++) {
                for (int j = i + 1; j < n; j++) {
                    if (forbid(gen)) {
                        w[i][j] = w[j][i] = std::numeric_limits<double>::infinity();
                    }
                }
            }
            if (std::isfinite(brute_force_min(w))) {
                check_instance(w);
            } else {
                EXPECT_THROW(min_weight_perfect_matching(w), std::runtime_error);
            }
        }
    }
}

// The structure the decoders build: fired detectors fully connected, each
// with a private boundary copy, boundary copies mutually free.
TEST(Matching, BoundaryCopyStructure) {
    std::mt19937_64 gen(99);
    std::uniform_real_distribution<double> real(0.1, 5.0);
    for (int f : {1, 2, 3, 4, 5}) {
        for (int rep = 0; rep < 100; rep++) {
            int n = 2 * f;
            std::vector<std::vector<double>> w(
                n, std::vector<double>(n, std::numeric_limits<double>::infinity()));
            for (int i = 0; i < f; i++) {
                for (int j = i + 1; j < f; j++) {
                    w[i][j] = w[j][i] = real(gen);
                }
                w[i][f + i] = w[f + i][i] = real(gen);
            }
            for (int i = f; i < n; i++) {
                for (int j = i + 1; j < n; j++) {
                    w[i][j] = w[j][i] = 0.0;
                }
            }
            check_instance(w);
        }
    }
}

TEST(Matching, DeterministicOnTies) {
    std::vector<std::vector<double>> w(6, std::vector<double>(6, 1.0));
    auto m1 = min_weight_perfect_matching(w);
    auto m2 = min_weight_perfect_matching(w);
    EXPECT_EQ(m1, m2);
}

TEST(Matching, LargerInstancesSatisfyDualCertificate) {
    std::mt19937_64 gen(2024);
    std::uniform_int_distribution<int64_t> wt(0, 1000000);
    for (int n : {20, 40, 60}) {
        MaxWeightMatcher matcher(n);
        for (int i = 0; i < n; i++) {
            for (int j = i + 1; j < n; j++) {
                matcher.add_edge(i, j, wt(gen));
            }
        }
        auto mate = matcher.solve();
        int matched = 0;
        for (int i = 0; i < n; i++) {
            matched += mate[i] >= 0;
        }
        EXPECT_EQ(matched, n);
        EXPECT_TRUE(matcher.verify_optimum());
    }
}

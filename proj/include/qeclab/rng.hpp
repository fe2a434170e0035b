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

#ifndef QECLAB_RNG_H
#define QECLAB_RNG_H

#include <cstdint>
#include <vector>

namespace qeclab {

/// Counter-based random streams. Every draw is a pure function of
/// (seed, shot, site, draw index), so samples are reproducible bit-exactly
/// regardless of execution order or thread count.
inline uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

struct CounterRng {
    uint64_t state;

    CounterRng(uint64_t seed, uint64_t shot, uint64_t site = 0)
        : state(mix64(mix64(mix64(seed) ^ (0xd1342543de82ef95ull * (shot + 1))) ^
                      (0xaf251af3b0f025b5ull * (site + 1)))) {
    }

    uint64_t next_u64() {
        state += 0x9e3779b97f4a7c15ull;
        uint64_t x = state;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

    // Uniform in [0, 1).
    double next_double() {
        return (next_u64() >> 11) * 0x1.0p-53;
    }

    bool next_bool() {
        return next_u64() >> 63;
    }

    bool bernoulli(double p) {
        return next_double() < p;
    }

    // Samples an index from an unnormalized cumulative table.
    size_t sample_cumulative(const std::vector<double> &cumulative) {
        double r = next_double() * cumulative.back();
        size_t lo = 0, hi = cumulative.size() - 1;
        while (lo < hi) {
            size_t mid = (lo + hi) / 2;
            if (cumulative[mid] <= r) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        return lo;
    }
};

}  // namespace qeclab

#endif

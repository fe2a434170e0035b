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

#ifndef QECLAB_THREADING_H
#define QECLAB_THREADING_H

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace qeclab {

inline size_t worker_count() {
    if (const char *env = std::getenv("QECLAB_THREADS")) {
        long n = std::atol(env);
        if (n >= 1) {
            return static_cast<size_t>(n);
        }
    }
    size_t n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : n;
}

/// Runs fn(i) for i in [0, n). Work items must write only to disjoint state
/// so that results are identical for any thread count.
inline void parallel_for(size_t n, const std::function<void(size_t)> &fn) {
    size_t workers = worker_count();
    if (workers <= 1 || n <= 1) {
        for (size_t i = 0; i < n; i++) {
            fn(i);
        }
        return;
    }
    std::atomic<size_t> cursor{0};
    auto run = [&]() {
        while (true) {
            size_t i = cursor.fetch_add(1);
            if (i >= n) {
                break;
            }
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    for (size_t w = 1; w < workers; w++) {
        pool.emplace_back(run);
    }
    run();
    for (auto &t : pool) {
        t.join();
    }
}

}  // namespace qeclab

#endif

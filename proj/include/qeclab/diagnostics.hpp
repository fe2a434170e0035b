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

#ifndef QECLAB_DIAGNOSTICS_H
#define QECLAB_DIAGNOSTICS_H

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "qeclab/circuit.hpp"
#include "qeclab/simulator.hpp"
#include "qeclab/threading.hpp"

namespace qeclab {

/// Shots x detectors bit matrix, stored detector-major for fast column
/// correlations, plus the reference-corrected observable flip of every shot.
struct DetectionMatrix {
    size_t shots = 0;
    int32_t num_detectors = 0;
    size_t words = 0;  // per detector column
    std::vector<uint64_t> bits;        // detector-major columns over shots
    std::vector<uint64_t> observable;  // one bit per shot

    // detector metadata, canonical round-major order
    std::vector<DetectorId> ids;
    std::vector<Basis> basis;
    Basis memory_basis = Basis::kZ;
    int rounds = 0;

    void init(size_t n_shots, int32_t n_detectors) {
        shots = n_shots;
        num_detectors = n_detectors;
        words = (shots + 63) / 64;
        bits.assign(words * n_detectors, 0);
        observable.assign(words, 0);
    }

    bool get(size_t shot, int32_t det) const {
        return (bits[det * words + (shot >> 6)] >> (shot & 63)) & 1;
    }
    void set(size_t shot, int32_t det, bool v) {
        uint64_t m = 1ull << (shot & 63);
        uint64_t &w = bits[det * words + (shot >> 6)];
        w = v ? (w | m) : (w & ~m);
    }
    bool observable_flip(size_t shot) const {
        return (observable[shot >> 6] >> (shot & 63)) & 1;
    }
    void set_observable(size_t shot, bool v) {
        uint64_t m = 1ull << (shot & 63);
        observable[shot >> 6] = v ? (observable[shot >> 6] | m) : (observable[shot >> 6] & ~m);
    }

    size_t count(int32_t det) const {
        size_t c = 0;
        for (size_t w = 0; w < words; w++) {
            c += std::popcount(bits[det * words + w]);
        }
        return c;
    }
    size_t pair_count(int32_t a, int32_t b) const {
        size_t c = 0;
        const uint64_t *wa = bits.data() + a * words;
        const uint64_t *wb = bits.data() + b * words;
        for (size_t w = 0; w < words; w++) {
            c += std::popcount(wa[w] & wb[w]);
        }
        return c;
    }
    size_t shot_weight(size_t shot) const {
        size_t c = 0;
        for (int32_t d = 0; d < num_detectors; d++) {
            c += get(shot, d);
        }
        return c;
    }
};

/// Converts measurement records into detection events: each detector bit is
/// the parity of its referenced records against the frozen noiseless
/// reference. Records must be binary (apply readout confusion first).
inline DetectionMatrix detections(const SampleBatch &batch, const Circuit &circuit) {
    if (batch.num_records != circuit.num_records) {
        throw std::invalid_argument("batch does not match circuit record layout");
    }
    DetectionMatrix m;
    m.init(batch.shots, static_cast<int32_t>(circuit.detectors.size()));
    m.memory_basis = circuit.basis;
    m.rounds = circuit.rounds;
    for (const auto &det : circuit.detectors) {
        m.ids.push_back(det.id);
    }
    for (int32_t d = 0; d < m.num_detectors; d++) {
        m.basis.push_back(circuit.detector_basis(d));
    }
    // Blocks are 64-shot aligned: threads own disjoint words of the
    // detector-major bit matrix.
    const size_t block = 1024;
    const size_t n_blocks = (batch.shots + block - 1) / block;
    parallel_for(n_blocks, [&](size_t bi) {
        size_t end = std::min(batch.shots, (bi + 1) * block);
        for (size_t shot = bi * block; shot < end; shot++) {
            const uint8_t *rec = batch.records.data() + shot * batch.num_records;
            for (int32_t d = 0; d < m.num_detectors; d++) {
                const Detector &det = circuit.detectors[d];
                unsigned parity = det.reference;
                for (int32_t r : det.records) {
                    if (rec[r] > 1) {
                        throw std::invalid_argument("records contain leakage symbols; "
                                                    "apply readout confusion first");
                    }
                    parity ^= rec[r];
                }
                if (parity) {
                    m.set(shot, d, true);
                }
            }
            unsigned obs = circuit.observable_reference;
            for (int32_t r : circuit.observable_records) {
                obs ^= rec[r];
            }
            if (obs) {
                m.set_observable(shot, true);
            }
        }
    });
    return m;
}

/// Samples a circuit in blocks and reduces straight to detection events,
/// avoiding whole-run record storage. Bit-identical to sampling, applying
/// readout error with seed mix64(master_seed ^ 0x5eedc0de), then reducing.
inline DetectionMatrix sample_detections(const Circuit &circuit, const NoisePlan &plan,
                                         size_t shots, uint64_t master_seed) {
    DetectionMatrix m;
    m.init(shots, static_cast<int32_t>(circuit.detectors.size()));
    m.memory_basis = circuit.basis;
    m.rounds = circuit.rounds;
    for (const auto &det : circuit.detectors) {
        m.ids.push_back(det.id);
    }
    for (int32_t d = 0; d < m.num_detectors; d++) {
        m.basis.push_back(circuit.detector_basis(d));
    }
    const uint64_t confusion_seed = mix64(master_seed ^ 0x5eedc0deull);
    const size_t block = 8192;
    for (size_t begin = 0; begin < shots; begin += block) {
        size_t count = std::min(block, shots - begin);
        SampleBatch batch;
        batch.shots = count;
        batch.num_records = circuit.num_records;
        batch.master_seed = master_seed;
        batch.records.resize(count * circuit.num_records);
        parallel_for(count, [&](size_t i) {
            size_t shot = begin + i;
            std::vector<uint8_t> rec;
            if (plan.has_leakage) {
                rec = run_shot(circuit, plan, master_seed, shot).records;
            } else {
                rec.resize(circuit.num_records);
                frame_shot_into(circuit, plan, master_seed, shot, rec.data());
            }
            // classical readout confusion
            for (int32_t r = 0; r < circuit.num_records; r++) {
                CounterRng rng(confusion_seed, shot, static_cast<uint64_t>(r));
                const ReadoutConfusion &row = plan.confusion[circuit.record_qubit[r]];
                rec[r] = rng.next_double() < row.rows[rec[r]][1] ? 1 : 0;
            }
            std::copy(rec.begin(), rec.end(), batch.records.begin() + i * circuit.num_records);
        });
        // reduce
        for (size_t i = 0; i < count; i++) {
            size_t shot = begin + i;
            const uint8_t *rec = batch.records.data() + i * circuit.num_records;
            for (int32_t d = 0; d < m.num_detectors; d++) {
                const Detector &det = circuit.detectors[d];
                unsigned parity = det.reference;
                for (int32_t r : det.records) {
                    parity ^= rec[r];
                }
                if (parity) {
                    m.set(shot, d, true);
                }
            }
            unsigned obs = circuit.observable_reference;
            for (int32_t r : circuit.observable_records) {
                obs ^= rec[r];
            }
            if (obs) {
                m.set_observable(shot, true);
            }
        }
    }
    return m;
}

struct DetectionStats {
    std::vector<double> per_detector;
    std::map<int, double> mean_by_weight;             // stabilizer weight -> mean
    std::map<int, std::vector<double>> round_series;  // weight -> mean per round index
};

inline DetectionStats detection_fraction(const DetectionMatrix &m, const CodeLayout &layout) {
    if (m.shots < 1) {
        throw std::invalid_argument("empty detection matrix");
    }
    DetectionStats stats;
    stats.per_detector.resize(m.num_detectors);
    std::map<int, std::map<int, std::pair<double, int>>> acc;  // weight -> round -> (sum, n)
    for (int32_t d = 0; d < m.num_detectors; d++) {
        double p = static_cast<double>(m.count(d)) / m.shots;
        stats.per_detector[d] = p;
        int w = layout.stabilizers[m.ids[d].stabilizer_index].weight();
        auto &cell = acc[w][m.ids[d].round];
        cell.first += p;
        cell.second++;
    }
    for (auto &[w, rounds] : acc) {
        double total = 0;
        int n = 0;
        int max_round = rounds.rbegin()->first;
        stats.round_series[w].assign(max_round + 1, 0.0);
        for (auto &[r, cell] : rounds) {
            stats.round_series[w][r] = cell.first / cell.second;
            total += cell.first;
            n += cell.second;
        }
        stats.mean_by_weight[w] = total / n;
    }
    return stats;
}

/// Symmetric matrix of two-mechanism pair probabilities. The diagonal holds
/// the raw per-detector detection probability.
struct CorrelationMatrix {
    int32_t n = 0;
    std::vector<double> values;   // n x n, NaN where degenerate
    size_t clamped = 0;           // negative-discriminant entries clamped to 0
    size_t degenerate = 0;        // entries flagged missing

    double at(int32_t i, int32_t j) const {
        return values[i * n + j];
    }
    double &at(int32_t i, int32_t j) {
        return values[i * n + j];
    }
};

namespace detail {

// Exact solution of the two-mechanism moment system in parity form:
// (1-2p_ij)^2 = e_i e_j / e_ij with e_i = 1-2<x_i>, e_ij = 1-2<x_i xor x_j>.
inline double pij_closed_form(double mean_i, double mean_j, double mean_xor, bool *degenerate,
                              bool *clamped, double eps = 1e-12) {
    double ei = 1 - 2 * mean_i;
    double ej = 1 - 2 * mean_j;
    double exor = 1 - 2 * mean_xor;
    *degenerate = false;
    *clamped = false;
    if (std::abs(exor) < eps || std::abs(ei) < eps || std::abs(ej) < eps) {
        *degenerate = true;
        return std::numeric_limits<double>::quiet_NaN();
    }
    double ratio = ei * ej / exor;
    if (ratio <= 0) {
        *degenerate = true;
        return std::numeric_limits<double>::quiet_NaN();
    }
    double p = 0.5 * (1 - std::sqrt(ratio));
    if (p < 0) {
        *clamped = true;
        return 0.0;
    }
    return std::min(p, 0.5);
}

}  // namespace detail

/// Pairwise correlation probabilities p_ij for all detector pairs.
inline CorrelationMatrix pij(const DetectionMatrix &m) {
    if (m.shots < 2) {
        throw std::invalid_argument("pij requires at least two shots");
    }
    CorrelationMatrix c;
    c.n = m.num_detectors;
    c.values.assign(static_cast<size_t>(c.n) * c.n, 0.0);
    std::vector<double> means(c.n);
    for (int32_t d = 0; d < c.n; d++) {
        means[d] = static_cast<double>(m.count(d)) / m.shots;
        c.at(d, d) = means[d];
    }
    std::vector<size_t> clamped_per_row(c.n, 0), degenerate_per_row(c.n, 0);
    // Marginals indistinguishable from one half within sampling noise leave
    // the moment system unresolvable; flag those entries as missing.
    const double eps = 5.0 / std::sqrt(static_cast<double>(m.shots));
    parallel_for(c.n, [&](size_t i32) {
        int32_t i = static_cast<int32_t>(i32);
        for (int32_t j = i + 1; j < c.n; j++) {
            double joint = static_cast<double>(m.pair_count(i, j)) / m.shots;
            double mean_xor = means[i] + means[j] - 2 * joint;
            bool degenerate = false, clamped = false;
            double p = detail::pij_closed_form(means[i], means[j], mean_xor, &degenerate, &clamped,
                                               eps);
            c.at(i, j) = p;
            c.at(j, i) = p;
            clamped_per_row[i] += clamped;
            degenerate_per_row[i] += degenerate;
        }
    });
    for (int32_t i = 0; i < c.n; i++) {
        c.clamped += clamped_per_row[i];
        c.degenerate += degenerate_per_row[i];
    }
    return c;
}

/// Statistical error of one p_ij entry by the delta method, for use in
/// recovery tests and calibration confidence reporting.
inline double pij_sigma(const DetectionMatrix &m, int32_t i, int32_t j) {
    double n = static_cast<double>(m.shots);
    double mi = m.count(i) / n, mj = m.count(j) / n;
    double joint = m.pair_count(i, j) / n;
    double mean_xor = mi + mj - 2 * joint;
    auto f = [](double a, double b, double x) {
        bool deg, cl;
        double v = detail::pij_closed_form(a, b, x, &deg, &cl);
        return std::isnan(v) ? 0.0 : v;
    };
    const double h = 1e-6;
    double gi = (f(mi + h, mj, mean_xor) - f(mi - h, mj, mean_xor)) / (2 * h);
    double gj = (f(mi, mj + h, mean_xor) - f(mi, mj - h, mean_xor)) / (2 * h);
    double gx = (f(mi, mj, mean_xor + h) - f(mi, mj, mean_xor - h)) / (2 * h);
    // Variances and covariances of the three means over Bernoulli samples.
    double vi = mi * (1 - mi) / n;
    double vj = mj * (1 - mj) / n;
    double vx = mean_xor * (1 - mean_xor) / n;
    // Covariances: cov(mi, xor) etc. are bounded by the variances; treating
    // the three as independent slightly overestimates sigma, which keeps the
    // 3-sigma acceptance conservative.
    return std::sqrt(gi * gi * vi + gj * gj * vj + gx * gx * vx);
}

/// Probability of an n-body error process over the given detectors (n <= 5):
/// solves the 2^n - 1 moment equations of the XOR-of-independent-processes
/// model exactly through the parity transform and returns the n-body term.
inline double cluster_prob(const DetectionMatrix &m, const std::vector<int32_t> &nodes) {
    const int n = static_cast<int>(nodes.size());
    if (n < 2 || n > 5) {
        throw std::invalid_argument("cluster_prob supports 2 to 5 detectors");
    }
    const int full = 1 << n;
    // Parity means for every nonempty subset T.
    std::vector<double> log_e(full, 0.0);
    for (int t = 1; t < full; t++) {
        size_t odd = 0;
        for (size_t w = 0; w < m.words; w++) {
            uint64_t acc = 0;
            for (int b = 0; b < n; b++) {
                if (t & (1 << b)) {
                    acc ^= m.bits[nodes[b] * m.words + w];
                }
            }
            odd += std::popcount(acc);
        }
        double e = 1.0 - 2.0 * static_cast<double>(odd) / m.shots;
        if (e <= 0) {
            throw std::runtime_error("cluster_prob: degenerate parity moment, no solution");
        }
        log_e[t] = std::log(e);
    }
    // F_T = F_0 - 2 ln e_T; F_0 fixed by y_empty = 0.
    double sum_log = 0;
    for (int t = 1; t < full; t++) {
        sum_log += log_e[t];
    }
    double f0 = std::pow(2.0, 1 - n) * sum_log;
    int target = full - 1;  // the n-body process
    double y = 0;
    for (int t = 0; t < full; t++) {
        double ft = t == 0 ? f0 : f0 - 2 * log_e[t];
        int overlap = std::popcount(static_cast<unsigned>(t & target));
        y += (overlap % 2 == 0 ? 1.0 : -1.0) * ft;
    }
    y /= full;
    return 0.5 * (1.0 - std::exp(y));
}

/// Row subset of a detection matrix (for even/odd splits and filtering).
inline DetectionMatrix select_shots(const DetectionMatrix &m, const std::vector<size_t> &keep) {
    DetectionMatrix out;
    out.init(keep.size(), m.num_detectors);
    out.ids = m.ids;
    out.basis = m.basis;
    out.memory_basis = m.memory_basis;
    out.rounds = m.rounds;
    for (size_t i = 0; i < keep.size(); i++) {
        for (int32_t d = 0; d < m.num_detectors; d++) {
            if (m.get(keep[i], d)) {
                out.set(i, d, true);
            }
        }
        out.set_observable(i, m.observable_flip(keep[i]));
    }
    return out;
}

struct BurstFilterResult {
    std::vector<size_t> flagged;  // shot indices
    DetectionMatrix filtered;
    double removal_fraction = 0;
    double mean = 0;
    double stddev = 0;
};

/// Flags shots whose total detection count exceeds
/// mean + threshold_sigma * stddev; returns the complement matrix.
inline BurstFilterResult detect_bursts(const DetectionMatrix &m, double threshold_sigma) {
    if (m.shots < 100) {
        throw std::invalid_argument("burst detection needs at least 100 shots");
    }
    std::vector<size_t> weights(m.shots);
    // accumulate per shot over detector columns
    for (int32_t d = 0; d < m.num_detectors; d++) {
        const uint64_t *col = m.bits.data() + d * m.words;
        for (size_t w = 0; w < m.words; w++) {
            uint64_t bitsw = col[w];
            while (bitsw) {
                weights[w * 64 + std::countr_zero(bitsw)]++;
                bitsw &= bitsw - 1;
            }
        }
    }
    BurstFilterResult result;
    double sum = 0, sq = 0;
    for (size_t s = 0; s < m.shots; s++) {
        sum += weights[s];
        sq += static_cast<double>(weights[s]) * weights[s];
    }
    result.mean = sum / m.shots;
    result.stddev = std::sqrt(std::max(0.0, sq / m.shots - result.mean * result.mean));
    double cut = result.mean + threshold_sigma * result.stddev;
    for (size_t s = 0; s < m.shots; s++) {
        if (weights[s] > cut) {
            result.flagged.push_back(s);
        }
    }
    result.removal_fraction = static_cast<double>(result.flagged.size()) / m.shots;

    result.filtered.init(m.shots - result.flagged.size(), m.num_detectors);
    result.filtered.ids = m.ids;
    result.filtered.basis = m.basis;
    result.filtered.memory_basis = m.memory_basis;
    result.filtered.rounds = m.rounds;
    size_t out = 0, flag_cursor = 0;
    for (size_t s = 0; s < m.shots; s++) {
        if (flag_cursor < result.flagged.size() && result.flagged[flag_cursor] == s) {
            flag_cursor++;
            continue;
        }
        for (int32_t d = 0; d < m.num_detectors; d++) {
            if (m.get(s, d)) {
                result.filtered.set(out, d, true);
            }
        }
        result.filtered.set_observable(out, m.observable_flip(s));
        out++;
    }
    return result;
}

}  // namespace qeclab

#endif

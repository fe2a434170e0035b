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

#ifndef QECLAB_ANALYSIS_H
#define QECLAB_ANALYSIS_H

#include <cmath>
#include <optional>
#include <vector>

#include "qeclab/decoders.hpp"
#include "qeclab/diagnostics.hpp"
#include "qeclab/simulator.hpp"

namespace qeclab {

struct FitPoint {
    int round = 0;
    double p_l = 0;
    double shots = 0;
};

struct FitResult {
    double epsilon = 0;       // logical error per cycle
    double sigma = 0;         // uncertainty, scaled by the excess residual factor
    double residual_scale = 1;
    int start_round = 3;
    size_t dropped_points = 0;  // non-positive fidelities in range
};

/// Fits F(r) = (1 - 2 eps)^r by weighted least squares on log10 F with
/// binomial variances, starting at `start_round` to avoid time-boundary
/// effects. The quoted uncertainty is scaled up by the observed-to-expected
/// residual ratio when the fit is worse than sampling noise alone.
inline FitResult fit_epsilon(const std::vector<FitPoint> &points, int start_round = 3) {
    std::vector<double> xs, ys, ws;
    FitResult result;
    result.start_round = start_round;
    for (const FitPoint &pt : points) {
        if (pt.round < start_round) {
            continue;
        }
        double fidelity = 1 - 2 * pt.p_l;
        if (fidelity <= 0) {
            result.dropped_points++;
            continue;
        }
        double p = std::clamp(pt.p_l, 0.5 / pt.shots, 1 - 0.5 / pt.shots);
        double sigma_f = 2 * std::sqrt(p * (1 - p) / pt.shots);
        double sigma_y = sigma_f / (fidelity * std::log(10.0));
        xs.push_back(pt.round);
        ys.push_back(std::log10(fidelity));
        ws.push_back(1.0 / (sigma_y * sigma_y));
    }
    if (xs.size() < 3) {
        throw std::invalid_argument("fit_epsilon needs at least three usable points");
    }
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < xs.size(); i++) {
        sw += ws[i];
        sx += ws[i] * xs[i];
        sy += ws[i] * ys[i];
        sxx += ws[i] * xs[i] * xs[i];
        sxy += ws[i] * xs[i] * ys[i];
    }
    double delta = sw * sxx - sx * sx;
    double slope = (sw * sxy - sx * sy) / delta;
    double intercept = (sxx * sy - sx * sxy) / delta;
    double var_slope = sw / delta;

    double chi2 = 0;
    for (size_t i = 0; i < xs.size(); i++) {
        double r = ys[i] - intercept - slope * xs[i];
        chi2 += ws[i] * r * r;
    }
    double dof = static_cast<double>(xs.size()) - 2;
    result.residual_scale = std::max(1.0, std::sqrt(chi2 / dof));
    double decay = std::pow(10.0, slope);  // F(r+1)/F(r) = 1 - 2 eps
    result.epsilon = std::clamp((1 - decay) / 2, 0.0, 0.5);
    result.sigma =
        0.5 * decay * std::log(10.0) * std::sqrt(var_slope) * result.residual_scale;
    return result;
}

/// Mean of independent per-basis (or per-grid) fits; uncertainties combine
/// by averaging as a conservative bound on correlated out-of-model errors.
inline FitResult average_fits(const std::vector<FitResult> &fits) {
    if (fits.empty()) {
        throw std::invalid_argument("no fits to average");
    }
    FitResult out = fits[0];
    out.epsilon = 0;
    out.sigma = 0;
    out.residual_scale = 0;
    for (const auto &f : fits) {
        out.epsilon += f.epsilon;
        out.sigma += f.sigma;
        out.residual_scale += f.residual_scale;
    }
    out.epsilon /= fits.size();
    out.sigma /= fits.size();
    out.residual_scale /= fits.size();
    return out;
}

struct LambdaResult {
    double value = 0;
    double sigma = 0;
};

/// Error-suppression factor eps_d / eps_{d+2} with first-order error
/// propagation.
inline LambdaResult lambda_factor(double eps_d, double sigma_d, double eps_d2, double sigma_d2) {
    if (eps_d2 <= 0) {
        throw std::invalid_argument("lambda needs a positive denominator");
    }
    LambdaResult r;
    r.value = eps_d / eps_d2;
    double rel_d = eps_d > 0 ? sigma_d / eps_d : 0.0;
    double rel_d2 = sigma_d2 / eps_d2;
    r.sigma = r.value * std::sqrt(rel_d * rel_d + rel_d2 * rel_d2);
    return r;
}

// ---- memory-experiment pipeline helpers

struct MemoryRunResult {
    int rounds = 0;
    LogicalErrorEstimate estimate;
};

/// Samples and decodes one memory experiment configuration.
inline MemoryRunResult run_memory_experiment(const CodeLayout &layout, Basis basis, int rounds,
                                             uint64_t init_value, const NoiseModel &model,
                                             const DecoderSpec &spec, size_t shots,
                                             uint64_t seed) {
    Circuit circuit = build_memory_circuit(layout, basis, rounds,
                                           {init_value, layout.num_data()});
    NoisePlan plan = model.assign(circuit);
    DetectionMatrix m = sample_detections(circuit, plan, shots, seed);
    Decoder decoder(dem_from_noise(circuit, plan), spec);
    return {rounds, logical_error_rate(m, decoder)};
}

/// Fits the logical error per cycle of one (layout, basis) memory experiment
/// across a list of cycle counts.
inline FitResult fit_memory_epsilon(const CodeLayout &layout, Basis basis,
                                    const std::vector<int> &rounds_list, const NoiseModel &model,
                                    const DecoderSpec &spec, size_t shots_per_point,
                                    uint64_t seed, int start_round = 3) {
    std::vector<FitPoint> points;
    for (size_t i = 0; i < rounds_list.size(); i++) {
        auto run = run_memory_experiment(layout, basis, rounds_list[i], 0, model, spec,
                                         shots_per_point, mix64(seed + i));
        points.push_back({run.rounds, run.estimate.p_l, static_cast<double>(shots_per_point)});
    }
    return fit_epsilon(points, start_round);
}

// ---- scale-factor threshold scans

struct ScanCell {
    double scale = 1;
    int distance = 3;
    FitResult fit;
    size_t shots_per_point = 0;
};

struct ScanGrid {
    std::vector<double> scales;
    std::vector<int> distances;
    std::vector<ScanCell> cells;  // scale-major

    const ScanCell &cell(size_t s_idx, size_t d_idx) const {
        return cells[s_idx * distances.size() + d_idx];
    }
};

/// Scales every component error probability by s and measures eps_d per
/// (s, d) cell with Pauli-mode sampling and two-pass correlated matching.
inline ScanGrid scale_scan(const ComponentRates &base, const std::vector<double> &s_values,
                           const std::vector<int> &distances, const std::vector<int> &rounds_list,
                           size_t shots_per_point, uint64_t seed) {
    for (int d : distances) {
        if (d > 7) {
            throw std::invalid_argument("scale_scan caps the code distance at 7");
        }
    }
    ScanGrid grid;
    grid.scales = s_values;
    grid.distances = distances;
    DecoderSpec spec{DecoderKind::kCorrelatedMwpm, {}};
    for (size_t si = 0; si < s_values.size(); si++) {
        for (size_t di = 0; di < distances.size(); di++) {
            NoiseModel model = build_noise_model(base.scaled(s_values[si]), NoiseMode::kPauli);
            auto layout = surface_layout(distances[di]);
            FitResult fit =
                fit_memory_epsilon(layout, Basis::kZ, rounds_list, model, spec, shots_per_point,
                                   mix64(seed ^ (si * 257 + di * 65537 + 1)));
            grid.cells.push_back({s_values[si], distances[di], fit, shots_per_point});
        }
    }
    return grid;
}

// ---- sensitivity of the logical error per cycle to one component

struct SensitivityResult {
    double slope = 0;  // d eps / d p
    double sigma = 0;
    std::vector<std::pair<double, FitResult>> samples;  // (delta, fit)
};

/// Shifts one component's error probability by each delta, refits eps, and
/// returns the weighted linear slope. DD gates keep the base single-qubit
/// rate, so varying sq_gate moves logical gates only.
inline SensitivityResult sensitivity(Component component, const std::vector<double> &deltas,
                                     const NoiseConfig &base, int distance,
                                     const std::vector<int> &rounds_list, size_t shots_per_point,
                                     uint64_t seed) {
    std::set<double> distinct(deltas.begin(), deltas.end());
    if (distinct.size() < 3 || !distinct.count(0.0)) {
        throw std::invalid_argument("sensitivity needs at least three distinct deltas incl. zero");
    }
    auto layout = surface_layout(distance);
    DecoderSpec spec{DecoderKind::kCorrelatedMwpm, {}};
    SensitivityResult result;
    std::vector<double> xs, ys, ws;
    for (size_t i = 0; i < deltas.size(); i++) {
        NoiseConfig cfg = base;
        if (component == Component::kSqGate && !cfg.dd_gate.has_value()) {
            cfg.dd_gate = base.rates.sq_gate;  // DD gates stay at the base point
        }
        cfg.rates.set(component, base.rates.get(component) + deltas[i]);
        NoiseModel model(cfg);
        FitResult fit = fit_memory_epsilon(layout, Basis::kZ, rounds_list, model, spec,
                                           shots_per_point, mix64(seed + 31 * i));
        result.samples.push_back({deltas[i], fit});
        xs.push_back(deltas[i]);
        ys.push_back(fit.epsilon);
        double sg = std::max(fit.sigma, 1e-12);
        ws.push_back(1.0 / (sg * sg));
    }
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < xs.size(); i++) {
        sw += ws[i];
        sx += ws[i] * xs[i];
        sy += ws[i] * ys[i];
        sxx += ws[i] * xs[i] * xs[i];
        sxy += ws[i] * xs[i] * ys[i];
    }
    double delta = sw * sxx - sx * sx;
    result.slope = (sw * sxy - sx * sy) / delta;
    result.sigma = std::sqrt(sw / delta);
    return result;
}

// ---- 1/Lambda error budget

struct BudgetRow {
    Component component;
    double p_expt = 0;
    double weight = 0;
    double contribution = 0;
    double share = 0;  // of the total
};

struct BudgetTable {
    std::vector<BudgetRow> rows;
    double total = 0;
};

/// Half-operation-point sensitivities (weights) of 1/Lambda_{3/5} per
/// component, in kAllComponents order.
inline std::vector<double> default_budget_weights() {
    return {78.7, 54.5, 7.0, 5.6, 5.6, 125.0, 125.0, 158.0};
}

/// 1/Lambda budget: contribution_i = w_i * p_i, with the CZ row carrying the
/// depolarizing share of the CZ error (crosstalk and leakage contributions
/// subtracted to avoid double counting).
inline BudgetTable budget(const std::vector<double> &weights, const ComponentRates &rates) {
    constexpr size_t n = std::size(kAllComponents);
    if (weights.size() != n) {
        throw std::invalid_argument("budget needs one weight per component");
    }
    NoiseConfig cfg;
    cfg.rates = rates;
    cfg.mode = NoiseMode::kPauliPlus;
    BudgetTable table;
    for (size_t i = 0; i < n; i++) {
        Component c = kAllComponents[i];
        BudgetRow row;
        row.component = c;
        row.weight = weights[i];
        row.p_expt = c == Component::kCzGate ? cfg.cz_depolarizing() : rates.get(c);
        row.contribution = row.weight * row.p_expt;
        table.total += row.contribution;
        table.rows.push_back(row);
    }
    for (auto &row : table.rows) {
        row.share = table.total > 0 ? row.contribution / table.total : 0.0;
    }
    return table;
}

// ---- repetition-code subsampling

struct RepetitionSubsample {
    Circuit circuit;  // the target-distance circuit the records now describe
    SampleBatch batch;
};

/// Restricts a repetition-code record batch to a contiguous sub-chain of
/// target_d data qubits (prefix-anchored unless an offset is given). The
/// result is bit-identical to having run the smaller code on the same noise
/// realizations.
inline RepetitionSubsample subsample_repetition(const SampleBatch &batch, const Circuit &source,
                                                int target_d, int offset = 0) {
    if (source.layout.kind != CodeKind::kRepetition) {
        throw std::invalid_argument("subsample_repetition needs a repetition-code batch");
    }
    int source_d = source.layout.distance;
    if (target_d < 2 || target_d > source_d || offset < 0 || offset + target_d > source_d) {
        throw std::invalid_argument("invalid subsample window");
    }
    // restrict the initial bitstring to the window
    uint64_t sub_init = 0;
    for (int j = 0; j < target_d; j++) {
        int src_bit = source.init.width - 1 - (offset + j);
        sub_init = (sub_init << 1) | ((source.init.value >> src_bit) & 1);
    }
    RepetitionSubsample out{
        build_memory_circuit(repetition_layout(target_d), Basis::kZ, source.rounds,
                             {sub_init, target_d}),
        {}};

    // map each target record to its source record through shifted coordinates
    const int16_t col_shift = static_cast<int16_t>(2 * offset);
    std::map<std::pair<int, QubitCoord>, int32_t> source_records;  // (nth measurement of qubit, coord)
    {
        std::map<QubitCoord, int> seen;
        for (int32_t r = 0; r < source.num_records; r++) {
            QubitCoord q = source.qubits[source.record_qubit[r]];
            source_records[{seen[q]++, q}] = r;
        }
    }
    std::vector<int32_t> map_to_source(out.circuit.num_records);
    {
        std::map<QubitCoord, int> seen;
        for (int32_t r = 0; r < out.circuit.num_records; r++) {
            QubitCoord q = out.circuit.qubits[out.circuit.record_qubit[r]];
            QubitCoord shifted{q.row, static_cast<int16_t>(q.col + col_shift)};
            auto it = source_records.find({seen[q]++, shifted});
            if (it == source_records.end()) {
                throw std::logic_error("record mapping failed");
            }
            map_to_source[r] = it->second;
        }
    }
    out.batch.shots = batch.shots;
    out.batch.num_records = out.circuit.num_records;
    out.batch.master_seed = batch.master_seed;
    out.batch.records.resize(batch.shots * out.circuit.num_records);
    for (size_t s = 0; s < batch.shots; s++) {
        for (int32_t r = 0; r < out.circuit.num_records; r++) {
            out.batch.at(s, r) = batch.at(s, map_to_source[r]);
        }
    }
    return out;
}

}  // namespace qeclab

#endif

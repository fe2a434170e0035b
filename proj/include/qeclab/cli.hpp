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

#ifndef QECLAB_CLI_H
#define QECLAB_CLI_H

#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

#include "qeclab/analysis.hpp"
#include "qeclab/io.hpp"
#include "qeclab/version.hpp"

namespace qeclab {

namespace detail {

inline uint64_t fnv1a(const std::string &s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h = (h ^ c) * 1099511628211ull;
    }
    return h;
}

inline std::string hex64(uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace detail

inline CodeLayout layout_of(const ExperimentConfig &cfg) {
    return cfg.code == CodeKind::kSurface ? surface_layout(cfg.distance)
                                          : repetition_layout(cfg.distance);
}

inline std::string code_label(const ExperimentConfig &cfg) {
    return std::string(cfg.code == CodeKind::kSurface ? "surface_" : "repetition_") +
           std::to_string(cfg.distance);
}

/// Copies src's rows into dst starting at row_offset.
inline void append_detection_rows(DetectionMatrix &dst, const DetectionMatrix &src,
                                  size_t row_offset) {
    for (size_t s = 0; s < src.shots; s++) {
        for (int32_t d = 0; d < src.num_detectors; d++) {
            if (src.get(s, d)) {
                dst.set(row_offset + s, d, true);
            }
        }
        if (src.observable_flip(s)) {
            dst.set_observable(row_offset + s, true);
        }
    }
}

inline void write_manifest(const ExperimentConfig &cfg, const std::string &command,
                           const std::vector<std::string> &outputs) {
    nlohmann::json manifest;
    manifest["tool"] = "qeclab";
    manifest["version"] = kVersion;
    manifest["command"] = command;
    manifest["config_hash"] = detail::hex64(detail::fnv1a(cfg.raw_text));
    manifest["seed"] = cfg.seed;
    manifest["shots"] = cfg.shots;
    manifest["outputs"] = outputs;
    write_text_file(cfg.out_dir + "/manifest_" + command + ".json", manifest.dump(2) + "\n");
}

inline std::string events_path(const ExperimentConfig &cfg, int rounds) {
    return cfg.out_dir + "/events_" + code_label(cfg) + "_" + basis_char(cfg.basis) + "_r" +
           std::to_string(rounds) + ".qdet";
}

/// Samples every configured cycle count, cycling the ten default initial
/// bitstrings evenly across shots, and writes one event file per cycle count
/// plus a manifest.
inline std::vector<std::string> cmd_sample(const ExperimentConfig &cfg) {
    cfg.validate();
    std::filesystem::create_directories(cfg.out_dir);
    CodeLayout layout = layout_of(cfg);
    NoiseModel model(cfg.noise);
    auto inits = default_initial_bitstrings_for_width(layout.num_data());
    std::vector<std::string> outputs;
    for (size_t ri = 0; ri < cfg.rounds.size(); ri++) {
        int rounds = cfg.rounds[ri];
        DetectionMatrix total;
        total.init(cfg.shots, detector_count(layout, cfg.basis, rounds));
        size_t offset = 0;
        for (size_t b = 0; b < inits.size(); b++) {
            size_t share = cfg.shots / inits.size() + (b < cfg.shots % inits.size() ? 1 : 0);
            if (share == 0) {
                continue;
            }
            Circuit circuit = build_memory_circuit(layout, cfg.basis, rounds, inits[b]);
            NoisePlan plan = model.assign(circuit);
            DetectionMatrix part = sample_detections(circuit, plan, share,
                                                     mix64(cfg.seed ^ (ri * 131 + b + 1)));
            if (total.ids.empty()) {
                total.ids = part.ids;
                total.basis = part.basis;
                total.memory_basis = part.memory_basis;
                total.rounds = part.rounds;
            }
            append_detection_rows(total, part, offset);
            offset += share;
        }
        std::string path = events_path(cfg, rounds);
        write_detection_events(total, path);
        outputs.push_back(path);
    }
    write_manifest(cfg, "sample", outputs);
    return outputs;
}

struct DecodeOptions {
    std::string dem_path;  // empty: build the ansatz from the noise model
    bool calibrate = false;  // even/odd p_ij calibration protocol
};

/// Decodes the event files of every configured cycle count into a p_L table.
inline std::vector<std::string> cmd_decode(const ExperimentConfig &cfg,
                                           const DecodeOptions &options = {}) {
    cfg.validate();
    CodeLayout layout = layout_of(cfg);
    NoiseModel model(cfg.noise);
    std::vector<PlRow> rows;
    for (int rounds : cfg.rounds) {
        Circuit circuit =
            build_memory_circuit(layout, cfg.basis, rounds, {0, layout.num_data()});
        DetectionMatrix m = read_detection_events(events_path(cfg, rounds), circuit);
        NoisePlan plan = model.assign(circuit);
        ErrorHypergraph ansatz;
        if (!options.dem_path.empty()) {
            ansatz = dem_from_text(read_text_file(options.dem_path));
            if (ansatz.num_detectors != m.num_detectors) {
                throw std::runtime_error("detector error model does not match the events");
            }
        } else {
            ansatz = dem_from_noise(circuit, plan);
        }
        double p_l = 0;
        if (options.calibrate) {
            // decode even shots with p_ij computed on the odd subset and
            // vice versa, then combine
            std::vector<size_t> even, odd;
            for (size_t s = 0; s < m.shots; s++) {
                (s % 2 == 0 ? even : odd).push_back(s);
            }
            DetectionMatrix m_even = select_shots(m, even);
            DetectionMatrix m_odd = select_shots(m, odd);
            Decoder dec_even(dem_from_pij(ansatz, m_odd, cfg.dem_floor), cfg.decoder);
            Decoder dec_odd(dem_from_pij(ansatz, m_even, cfg.dem_floor), cfg.decoder);
            auto est_even = logical_error_rate(m_even, dec_even);
            auto est_odd = logical_error_rate(m_odd, dec_odd);
            p_l = (est_even.errors + est_odd.errors) / static_cast<double>(m.shots);
        } else {
            Decoder decoder(ansatz, cfg.decoder);
            p_l = logical_error_rate(m, decoder).p_l;
        }
        rows.push_back({rounds, basis_char(cfg.basis), code_label(cfg), p_l, m.shots});
    }
    std::string path = cfg.out_dir + "/p_l.csv";
    write_text_file(path, pl_table_to_csv(rows));
    write_manifest(cfg, "decode", {path});
    return {path};
}

/// Writes the detector error model of the first configured cycle count,
/// optionally recalibrated from an event file.
inline std::vector<std::string> cmd_dem(const ExperimentConfig &cfg, bool calibrate_from_events) {
    cfg.validate();
    std::filesystem::create_directories(cfg.out_dir);
    CodeLayout layout = layout_of(cfg);
    int rounds = cfg.rounds.front();
    Circuit circuit = build_memory_circuit(layout, cfg.basis, rounds, {0, layout.num_data()});
    NoiseModel model(cfg.noise);
    ErrorHypergraph h = dem_from_noise(circuit, model.assign(circuit));
    if (calibrate_from_events) {
        DetectionMatrix m = read_detection_events(events_path(cfg, rounds), circuit);
        h = dem_from_pij(h, m, cfg.dem_floor);
    }
    std::string path = cfg.out_dir + "/dem_" + code_label(cfg) + "_r" + std::to_string(rounds) +
                       ".dem";
    write_text_file(path, dem_to_text(h));
    write_manifest(cfg, "dem", {path});
    return {path};
}

/// Fit / lambda / scan / budget reports from previously decoded tables or
/// fresh simulations.
inline std::vector<std::string> cmd_analyze(const ExperimentConfig &cfg, const std::string &mode) {
    cfg.validate();
    std::filesystem::create_directories(cfg.out_dir);
    std::vector<std::string> outputs;
    if (mode == "fit") {
        auto rows = pl_table_from_csv(read_text_file(cfg.out_dir + "/p_l.csv"));
        std::map<std::pair<char, std::string>, std::vector<FitPoint>> groups;
        for (const auto &r : rows) {
            groups[{r.basis, r.code}].push_back(
                {r.rounds, r.p_l, static_cast<double>(r.shots)});
        }
        std::ostringstream out;
        out << "code,basis,epsilon,sigma,residual_scale\n";
        for (auto &[key, pts] : groups) {
            FitResult fit = fit_epsilon(pts);
            out << key.second << "," << key.first << "," << format_probability(fit.epsilon)
                << "," << format_probability(fit.sigma) << ","
                << format_probability(fit.residual_scale) << "\n";
        }
        std::string path = cfg.out_dir + "/fit.csv";
        write_text_file(path, out.str());
        outputs.push_back(path);
    } else if (mode == "lambda") {
        // ratio of the two smallest distances present in fit.csv
        std::string text = read_text_file(cfg.out_dir + "/fit.csv");
        std::istringstream in(text);
        std::string line;
        std::getline(in, line);
        std::map<std::string, std::pair<double, double>> eps;
        while (std::getline(in, line)) {
            if (detail::trim(line).empty()) {
                continue;
            }
            auto parts = detail::split(line, ',');
            eps[parts[0]] = {std::stod(parts[2]), std::stod(parts[3])};
        }
        if (eps.size() < 2) {
            throw std::runtime_error("lambda needs fits for two code distances");
        }
        auto first = eps.begin();
        auto second = std::next(first);
        LambdaResult lam = lambda_factor(first->second.first, first->second.second,
                                         second->second.first, second->second.second);
        nlohmann::json j;
        j["numerator"] = first->first;
        j["denominator"] = second->first;
        j["lambda"] = lam.value;
        j["sigma"] = lam.sigma;
        std::string path = cfg.out_dir + "/lambda.json";
        write_text_file(path, j.dump(2) + "\n");
        outputs.push_back(path);
    } else if (mode == "scan") {
        ScanGrid grid = scale_scan(cfg.noise.rates, cfg.scan_scales, cfg.scan_distances,
                                   cfg.rounds, cfg.shots, cfg.seed);
        std::string path = cfg.out_dir + "/scan.csv";
        write_text_file(path, scan_grid_to_csv(grid));
        outputs.push_back(path);
    } else if (mode == "budget") {
        BudgetTable table = budget(default_budget_weights(), cfg.noise.rates);
        std::string path = cfg.out_dir + "/budget.csv";
        write_text_file(path, budget_to_csv(table));
        outputs.push_back(path);
    } else {
        throw std::invalid_argument("unknown analyze mode: " + mode);
    }
    write_manifest(cfg, "analyze_" + mode, outputs);
    return outputs;
}

/// Distance-25-style repetition study: sample once per cycle count, decode
/// subsampled copies at every target distance, fit eps per distance.
inline std::vector<std::string> cmd_subsample(const ExperimentConfig &cfg) {
    cfg.validate();
    if (cfg.code != CodeKind::kRepetition) {
        throw std::invalid_argument("subsample runs on repetition-code configs");
    }
    std::filesystem::create_directories(cfg.out_dir);
    CodeLayout layout = layout_of(cfg);
    NoiseModel model(cfg.noise);
    auto inits = default_initial_bitstrings_for_width(layout.num_data());
    std::map<int, std::vector<FitPoint>> points;  // target_d -> fit points
    for (size_t ri = 0; ri < cfg.rounds.size(); ri++) {
        int rounds = cfg.rounds[ri];
        Circuit circuit = build_memory_circuit(layout, Basis::kZ, rounds, inits[0]);
        NoisePlan plan = model.assign(circuit);
        SampleBatch batch = pauli_frame_sample(circuit, plan, cfg.shots,
                                               mix64(cfg.seed ^ (ri * 977 + 5)));
        batch = apply_readout_error(batch, plan, circuit, mix64(cfg.seed ^ (ri * 977 + 6)));
        for (int target : cfg.subsample_distances) {
            auto sub = subsample_repetition(batch, circuit, target);
            NoisePlan sub_plan = model.assign(sub.circuit);
            DetectionMatrix m = detections(sub.batch, sub.circuit);
            Decoder decoder(dem_from_noise(sub.circuit, sub_plan),
                            {DecoderKind::kMwpm, {}});
            auto est = logical_error_rate(m, decoder);
            points[target].push_back({rounds, est.p_l, static_cast<double>(cfg.shots)});
        }
    }
    std::ostringstream out;
    out << "distance,epsilon,sigma,residual_scale\n";
    for (auto &[target, pts] : points) {
        FitResult fit = fit_epsilon(pts);
        out << target << "," << format_probability(fit.epsilon) << ","
            << format_probability(fit.sigma) << "," << format_probability(fit.residual_scale)
            << "\n";
    }
    std::string path = cfg.out_dir + "/rep_scaling.csv";
    write_text_file(path, out.str());
    write_manifest(cfg, "subsample", {path});
    return {path};
}

}  // namespace qeclab

#endif

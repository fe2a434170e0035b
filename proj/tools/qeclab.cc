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

#include <CLI11.hpp>
#include <cstdio>

#include "qeclab/cli.hpp"

using namespace qeclab;

int main(int argc, char **argv) {
    CLI::App app{"surface-code memory-experiment laboratory"};
    app.require_subcommand(1);

    std::string config_path, dem_path, analyze_mode = "fit";
    bool calibrate = false;
    uint64_t seed_override = 0;
    bool seed_overridden = false;
    size_t shots_override = 0;
    std::string out_override;

    auto add_common = [&](CLI::App *cmd) {
        cmd->add_option("--config", config_path, "experiment config file")->required();
        cmd->add_option("--seed", seed_override, "override the config seed")
            ->each([&](const std::string &) { seed_overridden = true; });
        cmd->add_option("--shots", shots_override, "override the config shot count");
        cmd->add_option("--out", out_override, "override the output directory");
    };

    CLI::App *sample = app.add_subcommand("sample", "sample detection events");
    add_common(sample);
    CLI::App *decode = app.add_subcommand("decode", "decode event files into a p_L table");
    add_common(decode);
    decode->add_option("--dem", dem_path, "decode with this detector error model");
    decode->add_flag("--calibrate", calibrate, "even/odd correlation-calibrated decoding");
    CLI::App *analyze = app.add_subcommand("analyze", "fit, lambda, scan or budget reports");
    add_common(analyze);
    analyze->add_option("--mode", analyze_mode, "fit | lambda | scan | budget");
    CLI::App *dem = app.add_subcommand("dem", "write the detector error model");
    add_common(dem);
    dem->add_flag("--calibrate", calibrate, "recalibrate from sampled events");
    CLI::App *subsample = app.add_subcommand("subsample", "repetition-code subsampling study");
    add_common(subsample);

    CLI11_PARSE(app, argc, argv);

    try {
        ExperimentConfig cfg = load_config(config_path);
        if (seed_overridden) {
            cfg.seed = seed_override;
            cfg.seed_set = true;
        }
        if (shots_override) {
            cfg.shots = shots_override;
        }
        if (!out_override.empty()) {
            cfg.out_dir = out_override;
        }
        std::vector<std::string> outputs;
        if (sample->parsed()) {
            outputs = cmd_sample(cfg);
        } else if (decode->parsed()) {
            outputs = cmd_decode(cfg, {dem_path, calibrate});
        } else if (analyze->parsed()) {
            outputs = cmd_analyze(cfg, analyze_mode);
        } else if (dem->parsed()) {
            outputs = cmd_dem(cfg, calibrate);
        } else if (subsample->parsed()) {
            outputs = cmd_subsample(cfg);
        }
        for (const auto &path : outputs) {
            std::printf("%s\n", path.c_str());
        }
    } catch (const std::invalid_argument &e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}

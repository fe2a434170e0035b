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

#include "qeclab/cli.hpp"

#include <filesystem>

#include "gtest/gtest.h"

using namespace qeclab;

namespace {

std::string fresh_dir(const std::string &name) {
    auto dir = std::filesystem::temp_directory_path() / ("qeclab_cli_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir.string();
}

ExperimentConfig small_config(const std::string &out, const std::string &extra = "") {
    std::string text =
        "code = surface\n"
        "distance = 3\n"
        "basis = Z\n"
        "rounds = 3, 4, 5\n"
        "shots = 400\n"
        "seed = 777\n"
        "mode = pauli\n"
        "decoder = mwpm\n"
        "out = " + out + "\n" + extra;
    return parse_config(text);
}

}  // namespace

TEST(Cli, SampleIsDeterministicByteForByte) {
    std::string out = fresh_dir("sample");
    auto cfg = small_config(out);
    auto files = cmd_sample(cfg);
    ASSERT_EQ(files.size(), 3u);
    std::vector<std::string> first;
    for (const auto &f : files) {
        first.push_back(read_text_file(f));
    }
    cmd_sample(cfg);  // same config + seed: byte-identical outputs
    for (size_t i = 0; i < files.size(); i++) {
        EXPECT_EQ(read_text_file(files[i]), first[i]) << files[i];
    }
    EXPECT_TRUE(std::filesystem::exists(out + "/manifest_sample.json"));
}

TEST(Cli, SampleSplitsShotsAcrossBitstrings) {
    std::string out = fresh_dir("split");
    auto cfg = small_config(out);
    cfg.shots = 50;  // 10 bitstrings x 5 shots
    auto files = cmd_sample(cfg);
    auto layout = surface_layout(3);
    auto circuit = build_memory_circuit(layout, Basis::kZ, 3, {0, 9});
    auto m = read_detection_events(files[0], circuit);
    EXPECT_EQ(m.shots, 50u);
}

TEST(Cli, NoiselessPipelineGivesZeroLogicalError) {
    std::string out = fresh_dir("noiseless");
    auto cfg = small_config(out);
    cfg.noise.rates = ComponentRates::zero();
    cmd_sample(cfg);
    auto paths = cmd_decode(cfg);
    auto rows = pl_table_from_csv(read_text_file(paths[0]));
    ASSERT_EQ(rows.size(), 3u);
    for (const auto &r : rows) {
        EXPECT_EQ(r.p_l, 0.0);
        EXPECT_EQ(r.shots, 400u);
    }
}

TEST(Cli, DecodeCalibrateRuns) {
    std::string out = fresh_dir("calibrate");
    auto cfg = small_config(out);
    cfg.shots = 2000;
    cfg.rounds = {3};
    cmd_sample(cfg);
    auto paths = cmd_decode(cfg, {"", true});
    auto rows = pl_table_from_csv(read_text_file(paths[0]));
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_GT(rows[0].p_l, 0.0);
    EXPECT_LT(rows[0].p_l, 0.5);
}

TEST(Cli, DemRoundTripThroughDecode) {
    std::string out = fresh_dir("dem");
    auto cfg = small_config(out);
    cfg.rounds = {3};
    cmd_sample(cfg);
    auto dem_files = cmd_dem(cfg, false);
    // written model re-read: canonical form identical
    auto h = dem_from_text(read_text_file(dem_files[0]));
    EXPECT_EQ(dem_to_text(h), read_text_file(dem_files[0]));
    // decoding with the explicit model matches the implicit one
    auto p1 = cmd_decode(cfg);
    auto rows_implicit = pl_table_from_csv(read_text_file(p1[0]));
    auto p2 = cmd_decode(cfg, {dem_files[0], false});
    auto rows_explicit = pl_table_from_csv(read_text_file(p2[0]));
    EXPECT_EQ(rows_implicit[0].p_l, rows_explicit[0].p_l);
}

TEST(Cli, AnalyzeFitAndLambdaAndBudget) {
    std::string out = fresh_dir("analyze");
    auto cfg = small_config(out);
    // hand-written exact decay table for two code distances
    std::vector<PlRow> rows;
    for (int r = 3; r <= 11; r++) {
        rows.push_back({r, 'Z', "surface_3",
                        (1 - std::pow(1 - 2 * 0.04, r)) / 2, 100000});
        rows.push_back({r, 'Z', "surface_5",
                        (1 - std::pow(1 - 2 * 0.03, r)) / 2, 100000});
    }
    write_text_file(out + "/p_l.csv", pl_table_to_csv(rows));
    auto fit_files = cmd_analyze(cfg, "fit");
    std::string fit_csv = read_text_file(fit_files[0]);
    EXPECT_NE(fit_csv.find("surface_3"), std::string::npos);
    // epsilon echoed exactly for exact input
    {
        std::istringstream in(fit_csv);
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
            if (line.find("surface_3") == 0) {
                auto parts = qeclab::detail::split(line, ',');
                EXPECT_NEAR(std::stod(parts[2]), 0.04, 1e-10);
            }
            if (line.find("surface_5") == 0) {
                auto parts = qeclab::detail::split(line, ',');
                EXPECT_NEAR(std::stod(parts[2]), 0.03, 1e-10);
            }
        }
    }
    auto lambda_files = cmd_analyze(cfg, "lambda");
    auto lambda_json = nlohmann::json::parse(read_text_file(lambda_files[0]));
    EXPECT_NEAR(lambda_json["lambda"].get<double>(), 0.04 / 0.03, 1e-9);

    auto budget_files = cmd_analyze(cfg, "budget");
    EXPECT_NE(read_text_file(budget_files[0]).find("total,,,0.89"), std::string::npos);

    EXPECT_THROW(cmd_analyze(cfg, "nonsense"), std::invalid_argument);
}

TEST(Cli, SubsampleStudyRuns) {
    std::string out = fresh_dir("subsample");
    std::string text =
        "code = repetition\n"
        "distance = 7\n"
        "basis = Z\n"
        "rounds = 4, 6, 8\n"
        "shots = 3000\n"
        "seed = 31\n"
        "mode = pauli\n"
        "decoder = mwpm\n"
        "subsample_distances = 3, 5\n"
        "out = " + out + "\n";
    auto cfg = parse_config(text);
    auto files = cmd_subsample(cfg);
    std::string csv = read_text_file(files[0]);
    EXPECT_NE(csv.find("distance,epsilon"), std::string::npos);
    EXPECT_NE(csv.find("\n3,"), std::string::npos);
    EXPECT_NE(csv.find("\n5,"), std::string::npos);

    auto surface_cfg = small_config(out);
    EXPECT_THROW(cmd_subsample(surface_cfg), std::invalid_argument);
}

TEST(Cli, BinaryExitCodes) {
    std::string out = fresh_dir("binary");
    std::string cfg_path = out + "/cfg.txt";
    write_text_file(cfg_path,
                    "code = surface\ndistance = 3\nrounds = 3\nshots = 50\nseed = 1\nout = " +
                        out + "\n");
    std::string binary = QECLAB_BINARY_PATH;
    int ok = std::system((binary + " sample --config " + cfg_path + " > /dev/null").c_str());
    EXPECT_EQ(WEXITSTATUS(ok), 0);
    // missing seed -> config error (2)
    write_text_file(cfg_path, "code = surface\ndistance = 3\nrounds = 3\nshots = 50\n");
    int bad = std::system((binary + " sample --config " + cfg_path + " 2> /dev/null").c_str());
    EXPECT_EQ(WEXITSTATUS(bad), 2);
    // decoding without event files -> data error (3)
    write_text_file(cfg_path,
                    "code = surface\ndistance = 3\nrounds = 19\nshots = 50\nseed = 1\nout = " +
                        out + "\n");
    int data = std::system((binary + " decode --config " + cfg_path + " 2> /dev/null").c_str());
    EXPECT_EQ(WEXITSTATUS(data), 3);
}

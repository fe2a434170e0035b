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
//
// File formats owned by the command-line layer: the binary detection-event
// format, the detector-error-model text format, the circuit text format,
// experiment configs and CSV reports. All formats round-trip bit-exactly.

#ifndef QECLAB_IO_H
#define QECLAB_IO_H

#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "qeclab/analysis.hpp"
#include "qeclab/dem.hpp"
#include "qeclab/diagnostics.hpp"

namespace qeclab {

// ---- detection event file (binary)
//
// header: magic "QDET", u32 version, u32 detector count D, u64 shot count
// body:   per shot ceil(D/8) bytes (bit k of byte j = detector 8j+k,
//         detectors in round-major order) followed by one observable byte

inline constexpr char kEventMagic[4] = {'Q', 'D', 'E', 'T'};
inline constexpr uint32_t kEventVersion = 1;

inline void write_detection_events(const DetectionMatrix &m, const std::string &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    out.write(kEventMagic, 4);
    uint32_t version = kEventVersion, dets = m.num_detectors;
    uint64_t shots = m.shots;
    out.write(reinterpret_cast<const char *>(&version), 4);
    out.write(reinterpret_cast<const char *>(&dets), 4);
    out.write(reinterpret_cast<const char *>(&shots), 8);
    const size_t bytes_per_shot = (m.num_detectors + 7) / 8;
    std::vector<uint8_t> row(bytes_per_shot + 1);
    for (size_t s = 0; s < m.shots; s++) {
        std::fill(row.begin(), row.end(), 0);
        for (int32_t d = 0; d < m.num_detectors; d++) {
            if (m.get(s, d)) {
                row[d >> 3] |= 1 << (d & 7);
            }
        }
        row[bytes_per_shot] = m.observable_flip(s) ? 1 : 0;
        out.write(reinterpret_cast<const char *>(row.data()), row.size());
    }
}

/// Reads an event file; the circuit supplies the detector metadata and must
/// agree with the stored detector count.
inline DetectionMatrix read_detection_events(const std::string &path, const Circuit &circuit) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + path);
    }
    char magic[4];
    uint32_t version = 0, dets = 0;
    uint64_t shots = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char *>(&version), 4);
    in.read(reinterpret_cast<char *>(&dets), 4);
    in.read(reinterpret_cast<char *>(&shots), 8);
    if (!in || std::memcmp(magic, kEventMagic, 4) != 0 || version != kEventVersion) {
        throw std::runtime_error(path + ": not a detection event file");
    }
    if (dets != circuit.detectors.size()) {
        throw std::invalid_argument(path + ": detector count mismatch with circuit");
    }
    DetectionMatrix m;
    m.init(shots, static_cast<int32_t>(dets));
    m.memory_basis = circuit.basis;
    m.rounds = circuit.rounds;
    for (const auto &det : circuit.detectors) {
        m.ids.push_back(det.id);
    }
    for (int32_t d = 0; d < m.num_detectors; d++) {
        m.basis.push_back(circuit.detector_basis(d));
    }
    const size_t bytes_per_shot = (dets + 7) / 8;
    std::vector<uint8_t> row(bytes_per_shot + 1);
    for (uint64_t s = 0; s < shots; s++) {
        in.read(reinterpret_cast<char *>(row.data()), row.size());
        if (!in) {
            throw std::runtime_error(path + ": truncated event body");
        }
        for (uint32_t d = 0; d < dets; d++) {
            if ((row[d >> 3] >> (d & 7)) & 1) {
                m.set(s, d, true);
            }
        }
        if (row[bytes_per_shot] & 1) {
            m.set_observable(s, true);
        }
    }
    return m;
}

// ---- detector error model (text)

inline std::string format_probability(double p) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", p);
    return buf;
}

inline std::string dem_to_text(const ErrorHypergraph &h) {
    std::ostringstream out;
    out << "qeclab-dem 1\n";
    out << "memory " << basis_char(h.memory_basis) << "\n";
    out << "detectors " << h.num_detectors << "\n";
    for (int32_t d = 0; d < h.num_detectors; d++) {
        out << "detector " << d << " " << basis_char(h.detector_basis[d]) << " "
            << h.detector_ids[d].round << " " << h.detector_ids[d].stabilizer_index << "\n";
    }
    for (const auto &e : h.edges) {
        out << "error(" << format_probability(e.prob) << ")";
        for (int32_t d : e.detectors) {
            out << " D" << d;
        }
        if (e.logical) {
            out << " L";
        }
        out << "\n";
    }
    return out.str();
}

inline ErrorHypergraph dem_from_text(const std::string &text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "qeclab-dem 1") {
        throw std::runtime_error("not a qeclab detector error model");
    }
    ErrorHypergraph h;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::istringstream ls(line);
        std::string head;
        ls >> head;
        if (head == "memory") {
            std::string b;
            ls >> b;
            h.memory_basis = b == "X" ? Basis::kX : Basis::kZ;
        } else if (head == "detectors") {
            int n = 0;
            ls >> n;
            h.num_detectors = n;
            h.detector_basis.assign(n, Basis::kZ);
            h.detector_ids.assign(n, {});
        } else if (head == "detector") {
            int d, round, stab;
            std::string b;
            ls >> d >> b >> round >> stab;
            h.detector_basis[d] = b == "X" ? Basis::kX : Basis::kZ;
            h.detector_ids[d] = {round, stab};
        } else if (head.rfind("error(", 0) == 0) {
            size_t close = head.find(')');
            if (close == std::string::npos) {
                throw std::runtime_error("malformed error line: " + line);
            }
            Hyperedge e;
            e.prob = std::stod(head.substr(6, close - 6));
            std::string tok;
            while (ls >> tok) {
                if (tok == "L") {
                    e.logical = true;
                } else if (tok[0] == 'D') {
                    e.detectors.push_back(std::stoi(tok.substr(1)));
                } else {
                    throw std::runtime_error("malformed error token: " + tok);
                }
            }
            h.edges.push_back(std::move(e));
        } else {
            throw std::runtime_error("unknown dem line: " + line);
        }
    }
    return h;
}

// ---- circuit text: a versioned header with the generator parameters and
// one moment per block, one instruction per line, coordinates as "r,c".
// Readers rebuild the circuit from the parameters and verify the body.

inline std::string circuit_to_text(const Circuit &c) {
    std::ostringstream out;
    out << "qeclab-circuit 1\n";
    out << "code " << (c.layout.kind == CodeKind::kSurface ? "surface" : "repetition") << " "
        << c.layout.distance << "\n";
    out << "basis " << basis_char(c.basis) << "\n";
    out << "rounds " << c.rounds << "\n";
    out << "init " << c.init.value << " " << c.init.width << "\n";
    for (const auto &moment : c.moments) {
        out << "moment\n";
        for (const auto &ins : moment) {
            out << "  " << instruction_name(ins.kind);
            for (int32_t q : ins.targets) {
                out << " " << coord_str(c.qubits[q]);
            }
            out << "\n";
        }
    }
    return out.str();
}

inline Circuit circuit_from_text(const std::string &text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "qeclab-circuit 1") {
        throw std::runtime_error("not a qeclab circuit file");
    }
    std::string kind_word;
    int distance = 0, rounds = 0;
    char basis_ch = 'Z';
    uint64_t init_value = 0;
    int init_width = 0;
    std::string rest((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    {
        std::istringstream hd(rest);
        std::string word;
        hd >> word;  // "code"
        hd >> kind_word >> distance;
        hd >> word >> basis_ch;
        hd >> word >> rounds;
        hd >> word >> init_value >> init_width;
    }
    CodeLayout layout =
        kind_word == "surface" ? surface_layout(distance) : repetition_layout(distance);
    Circuit c = build_memory_circuit(layout, basis_ch == 'X' ? Basis::kX : Basis::kZ, rounds,
                                     {init_value, init_width});
    if (circuit_to_text(c) != text) {
        throw std::runtime_error("circuit body does not match its parameters");
    }
    return c;
}

// ---- experiment configuration: line-oriented "key = value" text

struct ExperimentConfig {
    CodeKind code = CodeKind::kSurface;
    int distance = 3;
    Basis basis = Basis::kZ;
    std::vector<int> rounds = {3, 5, 7};
    size_t shots = 0;          // mandatory
    bool seed_set = false;     // mandatory, no implicit entropy
    uint64_t seed = 0;
    NoiseConfig noise;
    DecoderSpec decoder{DecoderKind::kCorrelatedMwpm, {}};
    double dem_floor = 1e-4;
    std::string out_dir = ".";
    // scan / sensitivity / subsample parameters
    std::vector<double> scan_scales = {0.9, 1.0, 1.3};
    std::vector<int> scan_distances = {3, 5};
    std::vector<int> subsample_distances = {3, 5, 7, 9, 11};
    std::string raw_text;  // for hashing into manifests

    void validate() const {
        if (shots == 0) {
            throw std::invalid_argument("config: shots is mandatory");
        }
        if (!seed_set) {
            throw std::invalid_argument("config: seed is mandatory");
        }
        if (rounds.empty()) {
            throw std::invalid_argument("config: rounds list is empty");
        }
        noise.rates.validate();
    }
};

namespace detail {

inline std::vector<std::string> split(const std::string &s, char delim) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : s) {
        if (ch == delim) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    parts.push_back(cur);
    return parts;
}

inline std::string trim(const std::string &s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    size_t b = s.find_last_not_of(" \t\r\n");
    return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

inline QubitCoord parse_coord(const std::string &s) {
    auto parts = split(s, ',');
    if (parts.size() != 2) {
        throw std::invalid_argument("bad coordinate: " + s);
    }
    return {static_cast<int16_t>(std::stoi(parts[0])), static_cast<int16_t>(std::stoi(parts[1]))};
}

}  // namespace detail

inline ExperimentConfig parse_config(const std::string &text) {
    ExperimentConfig cfg;
    cfg.raw_text = text;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        lineno++;
        std::string stripped = detail::trim(line.substr(0, line.find('#')));
        if (stripped.empty()) {
            continue;
        }
        size_t eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        }
        std::string key = detail::trim(stripped.substr(0, eq));
        std::string value = detail::trim(stripped.substr(eq + 1));
        auto as_int_list = [&]() {
            std::vector<int> out;
            for (const auto &part : detail::split(value, ',')) {
                out.push_back(std::stoi(detail::trim(part)));
            }
            return out;
        };
        auto as_double_list = [&]() {
            std::vector<double> out;
            for (const auto &part : detail::split(value, ',')) {
                out.push_back(std::stod(detail::trim(part)));
            }
            return out;
        };
        if (key == "code") {
            if (value != "surface" && value != "repetition") {
                throw std::invalid_argument("config: unknown code kind " + value);
            }
            cfg.code = value == "surface" ? CodeKind::kSurface : CodeKind::kRepetition;
        } else if (key == "distance") {
            cfg.distance = std::stoi(value);
        } else if (key == "basis") {
            cfg.basis = value == "X" ? Basis::kX : Basis::kZ;
        } else if (key == "rounds") {
            cfg.rounds = as_int_list();
        } else if (key == "shots") {
            cfg.shots = std::stoull(value);
        } else if (key == "seed") {
            cfg.seed = std::stoull(value);
            cfg.seed_set = true;
        } else if (key == "mode") {
            if (value != "pauli" && value != "pauli_plus") {
                throw std::invalid_argument("config: unknown mode " + value);
            }
            cfg.noise.mode = value == "pauli" ? NoiseMode::kPauli : NoiseMode::kPauliPlus;
        } else if (key == "decoder") {
            if (value == "mwpm") {
                cfg.decoder.kind = DecoderKind::kMwpm;
            } else if (value == "correlated_mwpm") {
                cfg.decoder.kind = DecoderKind::kCorrelatedMwpm;
            } else if (value == "belief_matching") {
                cfg.decoder.kind = DecoderKind::kBeliefMatching;
            } else if (value == "ml") {
                cfg.decoder.kind = DecoderKind::kMaximumLikelihood;
            } else {
                throw std::invalid_argument("config: unknown decoder " + value);
            }
        } else if (key == "bp_iters") {
            cfg.decoder.bp.max_iters = std::stoi(value);
        } else if (key == "bp_rule") {
            cfg.decoder.bp.rule =
                value == "minsum" ? BPConfig::Rule::kMinSum : BPConfig::Rule::kTanh;
        } else if (key == "bp_schedule") {
            cfg.decoder.bp.schedule = value == "parallel" ? BPConfig::Schedule::kParallel
                                                          : BPConfig::Schedule::kSerial;
        } else if (key == "bp_minsum_scale") {
            cfg.decoder.bp.minsum_scale = std::stod(value);
        } else if (key == "dem_floor") {
            cfg.dem_floor = std::stod(value);
        } else if (key == "out") {
            cfg.out_dir = value;
        } else if (key.rfind("rate.", 0) == 0) {
            std::string name = key.substr(5);
            bool found = false;
            for (Component c : kAllComponents) {
                if (name == component_name(c)) {
                    cfg.noise.rates.set(c, std::stod(value));
                    found = true;
                }
            }
            if (!found) {
                throw std::invalid_argument("config: unknown rate " + name);
            }
        } else if (key == "t1") {
            cfg.noise.t1 = std::stod(value);
        } else if (key == "tphi") {
            cfg.noise.tphi = std::stod(value);
        } else if (key == "t_cycle") {
            cfg.noise.t_cycle = std::stod(value);
        } else if (key == "phi2") {
            cfg.noise.phi2 = std::stod(value);
        } else if (key == "phi3") {
            cfg.noise.phi3 = std::stod(value);
        } else if (key == "dd_gate") {
            cfg.noise.dd_gate = std::stod(value);
        } else if (key.rfind("override.t1.", 0) == 0) {
            cfg.noise.t1_override[detail::parse_coord(key.substr(12))] = std::stod(value);
        } else if (key.rfind("override.tphi.", 0) == 0) {
            cfg.noise.tphi_override[detail::parse_coord(key.substr(14))] = std::stod(value);
        } else if (key.rfind("override.gamma.", 0) == 0) {
            cfg.noise.gamma_override[detail::parse_coord(key.substr(15))] = std::stod(value);
        } else if (key.rfind("crosstalk.", 0) == 0) {
            auto parts = detail::split(key.substr(10), '.');
            if (parts.size() != 2) {
                throw std::invalid_argument("config: crosstalk key needs two coordinates");
            }
            cfg.noise.crosstalk_override[{detail::parse_coord(parts[0]),
                                          detail::parse_coord(parts[1])}] = std::stod(value);
        } else if (key == "scan_scales") {
            cfg.scan_scales = as_double_list();
        } else if (key == "scan_distances") {
            cfg.scan_distances = as_int_list();
        } else if (key == "subsample_distances") {
            cfg.subsample_distances = as_int_list();
        } else {
            throw std::invalid_argument("config: unknown key " + key);
        }
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot read config " + path);
    }
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config(text);
}

// ---- CSV reports (header row, comma separated, "." decimal)

struct PlRow {
    int rounds = 0;
    char basis = 'Z';
    std::string code;
    double p_l = 0;
    size_t shots = 0;
};

inline std::string pl_table_to_csv(const std::vector<PlRow> &rows) {
    std::ostringstream out;
    out << "rounds,basis,code,p_l,shots\n";
    for (const auto &r : rows) {
        out << r.rounds << "," << r.basis << "," << r.code << "," << format_probability(r.p_l)
            << "," << r.shots << "\n";
    }
    return out.str();
}

inline std::vector<PlRow> pl_table_from_csv(const std::string &text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "rounds,basis,code,p_l,shots") {
        throw std::runtime_error("not a p_l table");
    }
    std::vector<PlRow> rows;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) {
            continue;
        }
        auto parts = detail::split(line, ',');
        if (parts.size() != 5) {
            throw std::runtime_error("malformed p_l row: " + line);
        }
        rows.push_back({std::stoi(parts[0]), parts[1][0], parts[2], std::stod(parts[3]),
                        std::stoull(parts[4])});
    }
    return rows;
}

inline std::string scan_grid_to_csv(const ScanGrid &grid) {
    std::ostringstream out;
    out << "s,distance,epsilon,sigma,shots_per_point\n";
    for (const auto &cell : grid.cells) {
        out << format_probability(cell.scale) << "," << cell.distance << ","
            << format_probability(cell.fit.epsilon) << "," << format_probability(cell.fit.sigma)
            << "," << cell.shots_per_point << "\n";
    }
    return out.str();
}

inline std::string budget_to_csv(const BudgetTable &table) {
    std::ostringstream out;
    out << "component,p_expt,weight,contribution,share\n";
    for (const auto &row : table.rows) {
        out << component_name(row.component) << "," << format_probability(row.p_expt) << ","
            << format_probability(row.weight) << "," << format_probability(row.contribution)
            << "," << format_probability(row.share) << "\n";
    }
    out << "total,,," << format_probability(table.total) << ",1\n";
    return out.str();
}

inline void write_text_file(const std::string &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    out << text;
}

inline std::string read_text_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + path);
    }
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace qeclab

#endif

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

#ifndef QECLAB_CHANNELS_H
#define QECLAB_CHANNELS_H

#include <Eigen/Dense>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <unsupported/Eigen/MatrixFunctions>
#include <vector>

#include "qeclab/rng.hpp"

namespace qeclab {

// Devices are 4-level systems; |0>,|1> form the computational subspace.
// Leakage labels are classical: 0 = computational, 1 = |2>, 2 = |3>.
using LeakLabel = uint8_t;
inline constexpr LeakLabel kComputational = 0;

inline int label_level(LeakLabel l) {
    return l == 0 ? -1 : l + 1;  // level of a leaked label; computational has two levels
}

struct KrausChannel {
    int arity = 1;
    std::vector<Eigen::MatrixXcd> operators;

    int dim() const {
        int d = 1;
        for (int i = 0; i < arity; i++) {
            d *= 4;
        }
        return d;
    }

    // || sum K^dag K - I ||_inf
    double trace_preservation_defect() const {
        Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(dim(), dim());
        for (const auto &k : operators) {
            sum += k.adjoint() * k;
        }
        return (sum - Eigen::MatrixXcd::Identity(dim(), dim())).cwiseAbs().maxCoeff();
    }
};

// One sampled branch of a Generalized Pauli Channel: the final leakage
// labels plus a Pauli (x/z bit pair per device) on the devices that remain
// computational.
struct GPTransition {
    std::array<LeakLabel, 2> to{0, 0};
    double prob = 0;
    uint8_t r_mask = 0;  // devices receiving a Pauli (start and stay computational)
    // Pauli distribution over 4^|R| operators; per-device 2-bit code
    // x + 2z (I=0, X=1, Z=2, Y=3), device order = channel target order.
    std::vector<double> pauli;
};

struct GPChannel {
    int arity = 1;
    // transitions grouped by encoded initial label vector (base-3).
    std::vector<std::vector<GPTransition>> transitions;

    static int encode_labels(const LeakLabel *labels, int arity) {
        int code = 0;
        for (int i = arity - 1; i >= 0; i--) {
            code = code * 3 + labels[i];
        }
        return code;
    }

    const std::vector<GPTransition> &outcomes(const LeakLabel *labels) const {
        return transitions[encode_labels(labels, arity)];
    }

    // Total probability mass on branches that change any leakage label.
    double leakage_mass() const {
        double mass = 0;
        for (int code = 0; code < static_cast<int>(transitions.size()); code++) {
            LeakLabel from[2] = {static_cast<LeakLabel>(code % 3),
                                 static_cast<LeakLabel>((code / 3) % 3)};
            for (const auto &t : transitions[code]) {
                bool changes = false;
                for (int i = 0; i < arity; i++) {
                    changes |= t.to[i] != from[i];
                }
                if (changes) {
                    mass += t.prob;
                }
            }
        }
        return mass;
    }

    bool is_leakless() const {
        return leakage_mass() == 0.0;
    }

    double normalization_defect() const {
        double worst = 0;
        for (const auto &group : transitions) {
            if (group.empty()) {
                continue;
            }
            double total = 0;
            for (const auto &t : group) {
                total += t.prob;
                if (!t.pauli.empty()) {
                    double psum = 0;
                    for (double p : t.pauli) {
                        psum += p;
                    }
                    worst = std::max(worst, std::abs(psum - 1.0));
                }
            }
            worst = std::max(worst, std::abs(total - 1.0));
        }
        return worst;
    }
};

namespace detail {

inline int pow_int(int base, int exp) {
    int v = 1;
    for (int i = 0; i < exp; i++) {
        v *= base;
    }
    return v;
}

// Basis levels of a label: computational spans {0,1}, leaked labels are a
// single level.
inline void label_levels(LeakLabel l, int out[2], int *count) {
    if (l == kComputational) {
        out[0] = 0;
        out[1] = 1;
        *count = 2;
    } else {
        out[0] = l + 1;
        *count = 1;
    }
}

}  // namespace detail

/// Idle-decoherence channel of a 4-level device: decay at rate 1/T1 with the
/// sqrt(j+1) ladder (so |2> decays twice as fast as |1>), white-noise
/// dephasing at 2/Tphi, and heating |1> -> |2> at rate gamma12. The channel
/// is exp(duration * L) computed as a dense superoperator exponential and
/// factored into Kraus operators through the Choi matrix.
inline KrausChannel idle_channel(double t1, double tphi, double gamma12, double duration) {
    if (!(t1 > 0) || !(tphi > 0) || gamma12 < 0 || duration < 0 || !std::isfinite(duration)) {
        throw std::invalid_argument("idle_channel: bad parameters");
    }
    constexpr int d = 4;
    using Mat = Eigen::MatrixXcd;
    Mat a = Mat::Zero(d, d);
    for (int j = 0; j + 1 < d; j++) {
        a(j, j + 1) = std::sqrt(static_cast<double>(j + 1));
    }
    Mat n = a.adjoint() * a;
    Mat heat = Mat::Zero(d, d);
    heat(2, 1) = 1;

    // Superoperator of rho -> A rho A^dag - (1/2){A^dag A, rho}, column-major
    // vec convention: index of rho_{ij} is j*d + i.
    auto dissipator = [&](const Mat &op) {
        Mat lhs = Mat::Zero(d * d, d * d);
        for (int i = 0; i < d; i++) {
            for (int j = 0; j < d; j++) {
                for (int k = 0; k < d; k++) {
                    for (int l = 0; l < d; l++) {
                        lhs(j * d + i, l * d + k) += op(i, k) * std::conj(op(j, l));
                    }
                }
            }
        }
        Mat anti = op.adjoint() * op;
        for (int i = 0; i < d; i++) {
            for (int j = 0; j < d; j++) {
                for (int k = 0; k < d; k++) {
                    lhs(j * d + i, j * d + k) -= 0.5 * anti(i, k);   // M rho
                    lhs(j * d + i, k * d + i) -= 0.5 * anti(k, j);   // rho M
                }
            }
        }
        return lhs;
    };

    Mat lind = (1.0 / t1) * dissipator(a) + (2.0 / tphi) * dissipator(n) +
               gamma12 * dissipator(heat);
    Mat expo = (duration * lind).exp();

    // Choi matrix J[(i,m),(j,n)] = <m| E(|i><j|) |n>.
    Mat choi = Mat::Zero(d * d, d * d);
    for (int i = 0; i < d; i++) {
        for (int j = 0; j < d; j++) {
            // E(|i><j|): column vec of |i><j| is e_j kron e_i (column major).
            Eigen::VectorXcd v = Eigen::VectorXcd::Zero(d * d);
            v(j * d + i) = 1;
            Eigen::VectorXcd out = expo * v;
            for (int m = 0; m < d; m++) {
                for (int nn = 0; nn < d; nn++) {
                    choi(i * d + m, j * d + nn) += out(nn * d + m);
                }
            }
        }
    }
    Eigen::SelfAdjointEigenSolver<Mat> eig((choi + choi.adjoint()) / 2.0);
    KrausChannel channel;
    channel.arity = 1;
    for (int k = 0; k < d * d; k++) {
        double lam = eig.eigenvalues()(k);
        if (lam < 1e-14) {
            continue;
        }
        Mat kraus = Mat::Zero(d, d);
        for (int i = 0; i < d; i++) {
            for (int m = 0; m < d; m++) {
                kraus(m, i) = std::sqrt(lam) * eig.eigenvectors()(i * d + m, k);
            }
        }
        channel.operators.push_back(kraus);
    }
    return channel;
}

/// Two-device channel for dephasing-induced |11> <-> |02> transitions during
/// a CZ. The second target is the higher-frequency device and is the one
/// that leaks.
inline KrausChannel cz_leakage_channel(double p_t) {
    if (p_t < 0 || p_t > 1) {
        throw std::invalid_argument("cz_leakage_channel: p_t out of range");
    }
    constexpr int d = 16;
    using Mat = Eigen::MatrixXcd;
    // Index = 4*level(first device) + level(second device).
    const int i11 = 4 * 1 + 1;
    const int i02 = 4 * 0 + 2;
    Mat k1 = Mat::Zero(d, d);
    k1(i02, i11) = std::sqrt(p_t);
    k1(i11, i02) = std::sqrt(p_t);
    Mat k0 = Mat::Identity(d, d);
    k0(i11, i11) = std::sqrt(1 - p_t);
    k0(i02, i02) = std::sqrt(1 - p_t);
    KrausChannel c;
    c.arity = 2;
    c.operators = {k0, k1};
    return c;
}

/// Generalized Pauli Twirling: converts an arbitrary CPTP channel over
/// 4-level devices into a Generalized Pauli Channel. Each Kraus operator is
/// block-decomposed by the leakage projectors; blocks acting within the
/// computational subspaces are expanded in the Pauli basis and the squared
/// coefficients accumulate as probabilities, with a 1/2^|U| prefactor for
/// devices leaking upward.
inline GPChannel twirl(const KrausChannel &channel) {
    if (channel.trace_preservation_defect() > 1e-8) {
        throw std::invalid_argument("twirl: channel is not trace preserving");
    }
    const int arity = channel.arity;
    const int n_labels = detail::pow_int(3, arity);
    GPChannel gpc;
    gpc.arity = arity;
    gpc.transitions.assign(n_labels, {});

    std::array<LeakLabel, 2> from{}, to{};
    for (int icode = 0; icode < n_labels; icode++) {
        int tmp = icode;
        for (int q = 0; q < arity; q++) {
            from[q] = static_cast<LeakLabel>(tmp % 3);
            tmp /= 3;
        }
        for (int fcode = 0; fcode < n_labels; fcode++) {
            tmp = fcode;
            for (int q = 0; q < arity; q++) {
                to[q] = static_cast<LeakLabel>(tmp % 3);
                tmp /= 3;
            }
            uint8_t r_mask = 0, u_mask = 0, d_mask = 0;
            for (int q = 0; q < arity; q++) {
                bool from_c = from[q] == kComputational;
                bool to_c = to[q] == kComputational;
                if (from_c && to_c) {
                    r_mask |= 1 << q;
                } else if (from_c) {
                    u_mask |= 1 << q;
                } else if (to_c) {
                    d_mask |= 1 << q;
                }
            }
            int n_r = std::popcount(static_cast<unsigned>(r_mask));
            int n_u = std::popcount(static_cast<unsigned>(u_mask));
            int n_d = std::popcount(static_cast<unsigned>(d_mask));
            int r_dim = 1 << n_r;
            int n_pauli = detail::pow_int(4, n_r);
            std::vector<double> pauli_prob(n_pauli, 0.0);

            for (const auto &kraus : channel.operators) {
                for (int u_bits = 0; u_bits < (1 << n_u); u_bits++) {
                    for (int d_bits = 0; d_bits < (1 << n_d); d_bits++) {
                        // Sub-block on R in the computational basis.
                        Eigen::MatrixXcd block = Eigen::MatrixXcd::Zero(r_dim, r_dim);
                        auto sub_rank = [](uint8_t mask, int q) {
                            int seen = 0;
                            for (int p = 0; p < q; p++) {
                                if (mask & (1 << p)) {
                                    seen++;
                                }
                            }
                            return seen;
                        };
                        // Full-space index convention: device 0 is the most
                        // significant base-4 digit, matching |ab> ordering.
                        for (int r_out = 0; r_out < r_dim; r_out++) {
                            for (int r_in = 0; r_in < r_dim; r_in++) {
                                int in_idx = 0, out_idx = 0;
                                for (int q = 0; q < arity; q++) {
                                    int in_level, out_level;
                                    if (r_mask & (1 << q)) {
                                        int b = sub_rank(r_mask, q);
                                        in_level = (r_in >> b) & 1;
                                        out_level = (r_out >> b) & 1;
                                    } else if (u_mask & (1 << q)) {
                                        in_level = (u_bits >> sub_rank(u_mask, q)) & 1;
                                        out_level = to[q] + 1;
                                    } else if (d_mask & (1 << q)) {
                                        in_level = from[q] + 1;
                                        out_level = (d_bits >> sub_rank(d_mask, q)) & 1;
                                    } else {
                                        in_level = from[q] + 1;
                                        out_level = to[q] + 1;
                                    }
                                    in_idx = in_idx * 4 + in_level;
                                    out_idx = out_idx * 4 + out_level;
                                }
                                block(r_out, r_in) = kraus(out_idx, in_idx);
                            }
                        }
                        // Pauli expansion: c_mu = tr(sigma_mu block) / 2^|R|.
                        for (int mu = 0; mu < n_pauli; mu++) {
                            std::complex<double> coeff = 0;
                            for (int col = 0; col < r_dim; col++) {
                                // sigma_mu maps |col> to phase * |col ^ xbits>.
                                int m = mu;
                                int row = col;
                                std::complex<double> phase = 1.0;
                                for (int b = 0; b < n_r; b++) {
                                    int code = (m >> (2 * b)) & 3;
                                    int bit = (col >> b) & 1;
                                    bool xb = code & 1, zb = code & 2;
                                    if (xb) {
                                        row ^= 1 << b;
                                    }
                                    if (xb && zb) {
                                        // Y = iXZ: phase i * (-1)^bit applied to |bit>
                                        phase *= std::complex<double>(0, 1) *
                                                 ((bit == 1) ? -1.0 : 1.0);
                                    } else if (zb) {
                                        phase *= (bit == 1) ? -1.0 : 1.0;
                                    }
                                }
                                coeff += std::conj(phase) * block(row, col);
                            }
                            coeff /= static_cast<double>(r_dim);
                            pauli_prob[mu] += std::norm(coeff) / (1 << n_u);
                        }
                    }
                }
            }

            double total = 0;
            for (double p : pauli_prob) {
                total += p;
            }
            if (total < 1e-15) {
                continue;
            }
            GPTransition t;
            t.to = to;
            t.prob = total;
            t.r_mask = r_mask;
            if (n_r > 0) {
                t.pauli.resize(n_pauli);
                for (int mu = 0; mu < n_pauli; mu++) {
                    t.pauli[mu] = pauli_prob[mu] / total;
                }
            }
            gpc.transitions[icode].push_back(std::move(t));
        }
    }
    return gpc;
}

/// Per-qubit classical readout table: rows are the true symbol {0,1,2,3},
/// columns the recorded bit. Leaked states are read out as 0 or 1 with equal
/// probability; measure-qubit reset error is folded into eps by the caller.
struct ReadoutConfusion {
    std::array<std::array<double, 2>, 4> rows;

    double flip_probability(int true_symbol) const {
        if (true_symbol <= 1) {
            return rows[true_symbol][1 - true_symbol];
        }
        return 0.5;
    }
};

inline ReadoutConfusion readout_confusion(double eps0, double eps1) {
    if (eps0 < 0 || eps0 > 1 || eps1 < 0 || eps1 > 1) {
        throw std::invalid_argument("readout_confusion: probability out of range");
    }
    ReadoutConfusion c;
    c.rows[0] = {1 - eps0, eps0};
    c.rows[1] = {eps1, 1 - eps1};
    c.rows[2] = {0.5, 0.5};
    c.rows[3] = {0.5, 0.5};
    return c;
}

// ---- plain Pauli channels used by the fast path and as GPC building blocks

struct PauliChannel {
    int arity = 1;
    // probability per non-identity Pauli, index = per-device codes packed
    // base-4 little endian (device 0 in the low bits); entry 0 unused.
    std::vector<double> probs;

    double total() const {
        double t = 0;
        for (double p : probs) {
            t += p;
        }
        return t;
    }
};

inline PauliChannel depolarize1(double p) {
    PauliChannel c;
    c.arity = 1;
    c.probs.assign(4, p / 3.0);
    c.probs[0] = 0;
    return c;
}

inline PauliChannel depolarize2(double p) {
    PauliChannel c;
    c.arity = 2;
    c.probs.assign(16, p / 15.0);
    c.probs[0] = 0;
    return c;
}

inline PauliChannel pauli1(double px, double py, double pz) {
    PauliChannel c;
    c.arity = 1;
    c.probs = {0, px, pz, py};  // code x+2z: X=1, Z=2, Y=3
    return c;
}

/// Wraps a Pauli channel as a leakage-free GPC.
inline GPChannel gpc_from_pauli(const PauliChannel &p) {
    GPChannel g;
    g.arity = p.arity;
    g.transitions.assign(detail::pow_int(3, p.arity), {});
    std::array<LeakLabel, 2> from{};
    for (int icode = 0; icode < static_cast<int>(g.transitions.size()); icode++) {
        int tmp = icode;
        bool all_comp = true;
        for (int q = 0; q < p.arity; q++) {
            from[q] = static_cast<LeakLabel>(tmp % 3);
            all_comp &= from[q] == kComputational;
            tmp /= 3;
        }
        GPTransition t;
        t.to = from;
        t.prob = 1.0;
        if (all_comp) {
            t.r_mask = p.arity == 1 ? 1 : 3;
            t.pauli.assign(detail::pow_int(4, p.arity), 0.0);
            double total = 0;
            for (size_t mu = 1; mu < p.probs.size(); mu++) {
                t.pauli[mu] = p.probs[mu];
                total += p.probs[mu];
            }
            t.pauli[0] = 1.0 - total;
        } else {
            // Leaked devices keep their labels; remaining computational
            // devices are untouched (single-device channels have none, and
            // for two-device Pauli channels we approximate the restriction
            // as identity).
            uint8_t r = 0;
            for (int q = 0; q < p.arity; q++) {
                if (from[q] == kComputational) {
                    r |= 1 << q;
                }
            }
            t.r_mask = r;
            if (r) {
                int n_r = std::popcount(static_cast<unsigned>(r));
                t.pauli.assign(detail::pow_int(4, n_r), 0.0);
                t.pauli[0] = 1.0;
            }
        }
        g.transitions[icode].push_back(std::move(t));
    }
    return g;
}

/// GPC for the conditional phase picked up by the computational partner of a
/// leaked device during a CZ: under twirling a leakage phase phi becomes a
/// Z error with probability sin^2(phi/2).
inline GPChannel leaked_partner_phase_gpc(double phi2, double phi3) {
    GPChannel g;
    g.arity = 2;
    g.transitions.assign(9, {});
    for (int icode = 0; icode < 9; icode++) {
        LeakLabel a = static_cast<LeakLabel>(icode % 3);
        LeakLabel b = static_cast<LeakLabel>(icode / 3);
        GPTransition t;
        t.to = {a, b};
        t.prob = 1.0;
        bool a_comp = a == kComputational, b_comp = b == kComputational;
        if (a_comp != b_comp) {
            LeakLabel leaked = a_comp ? b : a;
            double pz = std::pow(std::sin((leaked == 1 ? phi2 : phi3) / 2.0), 2);
            t.r_mask = a_comp ? 1 : 2;
            t.pauli = {1.0 - pz, 0.0, pz, 0.0};
        } else if (a_comp && b_comp) {
            t.r_mask = 3;
            t.pauli.assign(16, 0.0);
            t.pauli[0] = 1.0;
        }
        g.transitions[icode].push_back(std::move(t));
    }
    return g;
}

/// Drops the Pauli content of computational-to-computational branches,
/// keeping only the leakage bookkeeping. Used when the Pauli error budget is
/// already carried by separately calibrated depolarizing channels.
inline GPChannel strip_computational_pauli(GPChannel g) {
    for (auto &group : g.transitions) {
        for (auto &t : group) {
            if (!t.pauli.empty()) {
                std::fill(t.pauli.begin(), t.pauli.end(), 0.0);
                t.pauli[0] = 1.0;
            }
        }
    }
    return g;
}

}  // namespace qeclab

#endif

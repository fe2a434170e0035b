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

#include "qeclab/channels.hpp"

#include <cmath>

#include "gtest/gtest.h"
#include "oracles.hpp"

using namespace qeclab;
using Eigen::MatrixXcd;

TEST(Channels, IdleChannelIsCptp) {
    for (double dur : {0.0, 25e-9, 896e-9, 10e-6}) {
        auto c = idle_channel(20e-6, 120e-6, 1.0 / 700e-6, dur);
        EXPECT_LE(c.trace_preservation_defect(), 1e-10) << "duration " << dur;
    }
}

TEST(Channels, IdleChannelZeroDurationIsIdentity) {
    auto c = idle_channel(20e-6, 30e-6, 1e3, 0.0);
    MatrixXcd rho = MatrixXcd::Zero(4, 4);
    rho(1, 1) = 0.5;
    rho(0, 0) = 0.25;
    rho(2, 2) = 0.25;
    rho(0, 1) = rho(1, 0) = 0.2;
    MatrixXcd out = oracles::apply_channel(c, rho);
    EXPECT_LE((out - rho).cwiseAbs().maxCoeff(), 1e-10);
}

// With dephasing and heating off, |1> decays as exp(-t/T1) and |2> twice as
// fast, the sqrt(j+1) ladder convention.
TEST(Channels, IdleChannelAmplitudeDamping) {
    double t1 = 20e-6, t = 5e-6;
    auto c = idle_channel(t1, 1e6, 0.0, t);
    MatrixXcd rho = MatrixXcd::Zero(4, 4);
    rho(1, 1) = 1.0;
    MatrixXcd out = oracles::apply_channel(c, rho);
    EXPECT_NEAR(std::real(out(1, 1)), std::exp(-t / t1), 1e-6);

    rho.setZero();
    rho(2, 2) = 1.0;
    out = oracles::apply_channel(c, rho);
    EXPECT_NEAR(std::real(out(2, 2)), std::exp(-2 * t / t1), 1e-6);
}

// Heating at Gamma = 1/(700us) over one 896ns cycle with |1> occupation 1/2
// leaks with probability 0.5 * Gamma * t = 6.4e-4.
TEST(Channels, IdleChannelHeatingRate) {
    double gamma = 1.0 / 700e-6, t_cycle = 896e-9;
    auto c = idle_channel(1e3, 1e6, gamma, t_cycle);  // decay negligible
    MatrixXcd rho = MatrixXcd::Zero(4, 4);
    rho(0, 0) = 0.5;
    rho(1, 1) = 0.5;
    MatrixXcd out = oracles::apply_channel(c, rho);
    EXPECT_NEAR(std::real(out(2, 2)), 0.5 * gamma * t_cycle, 0.01 * 0.5 * gamma * t_cycle);
    EXPECT_NEAR(0.5 * gamma * t_cycle, 6.4e-4, 1e-6);
}

TEST(Channels, IdleChannelRejectsBadParameters) {
    EXPECT_THROW(idle_channel(0, 1, 0, 1), std::invalid_argument);
    EXPECT_THROW(idle_channel(1, -1, 0, 1), std::invalid_argument);
    EXPECT_THROW(idle_channel(1, 1, -1, 1), std::invalid_argument);
    EXPECT_THROW(idle_channel(1, 1, 0, std::nan("")), std::invalid_argument);
}

TEST(Channels, CzLeakageChannel) {
    EXPECT_THROW(cz_leakage_channel(-0.1), std::invalid_argument);
    EXPECT_THROW(cz_leakage_channel(1.1), std::invalid_argument);

    auto id = cz_leakage_channel(0.0);
    MatrixXcd rho = MatrixXcd::Zero(16, 16);
    rho(5, 5) = 1.0;  // |11>
    EXPECT_LE((oracles::apply_channel(id, rho) - rho).cwiseAbs().maxCoeff(), 1e-12);

    auto c = cz_leakage_channel(0.5);
    EXPECT_LE(c.trace_preservation_defect(), 1e-12);
    MatrixXcd out = oracles::apply_channel(c, rho);
    EXPECT_NEAR(std::real(out(2, 2)), 0.5, 1e-12);  // |02>
    EXPECT_NEAR(std::real(out(5, 5)), 0.5, 1e-12);
}

TEST(Channels, ReadoutConfusionRows) {
    auto c = readout_confusion(0.0, 0.0);
    EXPECT_EQ(c.rows[0][0], 1.0);
    EXPECT_EQ(c.rows[1][1], 1.0);
    EXPECT_EQ(c.rows[2][0], 0.5);
    EXPECT_EQ(c.rows[3][1], 0.5);

    auto d = readout_confusion(1.96e-2, 1.96e-2);
    for (int row = 0; row < 4; row++) {
        EXPECT_NEAR(d.rows[row][0] + d.rows[row][1], 1.0, 1e-15);
    }
    EXPECT_NEAR(d.flip_probability(0), 1.96e-2, 1e-15);
    EXPECT_NEAR(d.flip_probability(2), 0.5, 1e-15);

    EXPECT_THROW(readout_confusion(-0.1, 0), std::invalid_argument);
    EXPECT_THROW(readout_confusion(0, 1.5), std::invalid_argument);
}

TEST(Channels, PauliChannelHelpers) {
    auto d1 = depolarize1(0.03);
    EXPECT_NEAR(d1.total(), 0.03, 1e-15);
    auto d2 = depolarize2(0.15);
    EXPECT_NEAR(d2.total(), 0.15, 1e-15);
    EXPECT_EQ(d2.probs.size(), 16u);
    EXPECT_EQ(d2.probs[0], 0.0);

    auto g = gpc_from_pauli(d2);
    EXPECT_TRUE(g.is_leakless());
    EXPECT_LE(g.normalization_defect(), 1e-12);
}

TEST(Channels, LeakedPartnerPhase) {
    auto g = leaked_partner_phase_gpc(M_PI / 2, M_PI / 2);
    LeakLabel labels[2] = {kComputational, 1};
    const auto &ts = g.outcomes(labels);
    ASSERT_EQ(ts.size(), 1u);
    EXPECT_EQ(ts[0].to[1], 1);
    ASSERT_EQ(ts[0].pauli.size(), 4u);
    EXPECT_NEAR(ts[0].pauli[2], 0.5, 1e-12);  // Z half the time at phi = pi/2
    EXPECT_NEAR(ts[0].pauli[0], 0.5, 1e-12);

    LeakLabel both[2] = {kComputational, kComputational};
    EXPECT_NEAR(g.outcomes(both)[0].pauli[0], 1.0, 1e-12);
}

TEST(Channels, StripComputationalPauli) {
    auto g = strip_computational_pauli(gpc_from_pauli(depolarize1(0.2)));
    LeakLabel labels[1] = {kComputational};
    EXPECT_NEAR(g.outcomes(labels)[0].pauli[0], 1.0, 1e-15);
    EXPECT_LE(g.normalization_defect(), 1e-12);
}

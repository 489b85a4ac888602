// Copyright 2026 The twocolor Authors
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

#include "twocolor/metrics.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "test_support.h"
#include "twocolor/gaussian_core.h"

namespace twocolor::metrics {
namespace {

constexpr double kPi = std::numbers::pi;
using gaussian::GaussianState;

GaussianState tmss(double r) { return gaussian::two_mode_squeezer(r).apply(gaussian::vacuum(2)); }

double wrap(double a) { return std::remainder(a, 2.0 * kPi); }

TEST(Inseparability, PublishedPair) {
    const auto r = inseparability(1.50, 1.78);
    EXPECT_DOUBLE_EQ(r.v_diff_half, 0.75);
    EXPECT_DOUBLE_EQ(r.v_sum_half, 0.89);
    EXPECT_NEAR(r.I, 0.82, 1e-12);
    EXPECT_NEAR(r.db, -0.8619, 5e-5);
    EXPECT_TRUE(r.entangled);
    EXPECT_FALSE(inseparability(2.0, 2.0).entangled);
    EXPECT_THROW(inseparability(-0.1, 1.0), std::invalid_argument);
}

TEST(ToDb, Values) {
    EXPECT_DOUBLE_EQ(to_db(1.0), 0.0);
    EXPECT_NEAR(to_db(0.5), -3.0103, 1e-4);
    EXPECT_NEAR(to_db(10.0), 10.0, 1e-12);
    EXPECT_THROW(to_db(0.0), std::domain_error);
    EXPECT_THROW(to_db(-1.0), std::domain_error);
}

TEST(Variances, TwoModeSqueezedClosedForm) {
    for (double r : {0.0, 0.3, 1.0}) {
        const auto s = tmss(r);
        const double v = 2.0 * std::exp(-2.0 * r);
        EXPECT_NEAR(difference_variance(s, 0.0, 0.0), v, 1e-12);
        EXPECT_NEAR(sum_variance(s, 0.0, 0.0), v, 1e-12);
        EXPECT_NEAR(difference_variance(s, kPi / 2, kPi / 2), 2.0 * std::exp(2.0 * r), 1e-9);
    }
    EXPECT_THROW(difference_variance(gaussian::vacuum(1), 0.0, 0.0), std::invalid_argument);
}

TEST(OptimalAngles, TwoModeSqueezed) {
    const auto best = optimal_angles(tmss(0.4));
    EXPECT_NEAR(best.theta_a, 0.0, 1e-6);
    EXPECT_NEAR(best.theta_b, 0.0, 1e-6);
    EXPECT_NEAR(best.result.I, std::exp(-0.8), 1e-9);
}

TEST(OptimalAngles, FollowsLocalRotation) {
    for (double phi : {-1.2, -0.4, 0.3, 1.1}) {
        const auto s = gaussian::phase_rotation(phi, 2, 0).apply(tmss(0.5));
        const auto best = optimal_angles(s);
        EXPECT_NEAR(wrap(best.theta_a + phi), 0.0, 1e-5) << "phi=" << phi;
        EXPECT_NEAR(best.theta_b, 0.0, 1e-5);
        EXPECT_NEAR(best.result.I, std::exp(-1.0), 1e-9);
    }
}

TEST(OptimalAngles, NeverWorseThanFixedAngles) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> angle(-kPi, kPi);
    for (int trial = 0; trial < 20; ++trial) {
        const gaussian::SymplecticOp op(testing::random_symplectic(2, rng));
        const auto s = op.apply(gaussian::vacuum(2));
        const auto best = optimal_angles(s);
        const double at_best = difference_variance(s, best.theta_a, best.theta_b);
        for (int k = 0; k < 50; ++k) {
            EXPECT_LE(at_best, difference_variance(s, angle(rng), angle(rng)) + 1e-9);
        }
        const double i = (at_best + sum_variance(s, best.theta_a, best.theta_b)) / 4.0;
        EXPECT_NEAR(best.result.I, i, 1e-9);
    }
}

TEST(OptimalAngles, LocalOperationsStaySeparable) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> occupation(1.0, 3.0);
    for (int trial = 0; trial < 30; ++trial) {
        Eigen::MatrixXd local = Eigen::MatrixXd::Zero(4, 4);
        local.topLeftCorner(2, 2) = testing::random_symplectic(1, rng, 0.8);
        local.bottomRightCorner(2, 2) = testing::random_symplectic(1, rng, 0.8);
        const auto s = gaussian::SymplecticOp(local).apply(gaussian::thermal({occupation(rng), occupation(rng)}));
        EXPECT_GE(optimal_angles(s).result.I, 1.0 - 1e-9);
    }
}

TEST(ScanTrace, MatchesDirectEvaluation) {
    std::mt19937_64 rng(12);
    const auto s = gaussian::SymplecticOp(testing::random_symplectic(2, rng)).apply(gaussian::vacuum(2));
    std::vector<double> ramp;
    for (int k = 0; k < 73; ++k) {
        ramp.push_back(-kPi + 2.0 * kPi * k / 72.0);
    }
    const auto alice = scan_trace(s, ramp, 0.4, FixedSide::bob);
    const auto bob = scan_trace(s, ramp, -0.7, FixedSide::alice);
    ASSERT_EQ(alice.size(), ramp.size());
    for (std::size_t k = 0; k < ramp.size(); ++k) {
        EXPECT_DOUBLE_EQ(alice[k].angle, ramp[k]);
        EXPECT_NEAR(alice[k].v_a, gaussian::homodyne_variance(s, 0, ramp[k]), 1e-12);
        EXPECT_NEAR(alice[k].v_b, gaussian::homodyne_variance(s, 1, 0.4), 1e-12);
        EXPECT_NEAR(alice[k].combined_half, 0.5 * difference_variance(s, ramp[k], 0.4), 1e-12);
        EXPECT_NEAR(bob[k].v_b, gaussian::homodyne_variance(s, 1, ramp[k]), 1e-12);
        EXPECT_NEAR(bob[k].combined_half, 0.5 * difference_variance(s, -0.7, ramp[k]), 1e-12);
    }
    // Single-detector traces repeat every half turn.
    EXPECT_NEAR(alice.front().v_a, alice[36].v_a, 1e-12);
    EXPECT_NEAR(alice[10].v_a, alice[46].v_a, 1e-12);
    EXPECT_THROW(scan_trace(s, {}, 0.0, FixedSide::bob), std::invalid_argument);
}

std::vector<HarmonicSample> harmonic_windows(const Eigen::Matrix<double, 5, 1>& c, int windows, double noise,
                                             std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<HarmonicSample> out;
    for (int w = 0; w < windows; ++w) {
        std::vector<double> angles;
        for (int k = 0; k < 40; ++k) {
            angles.push_back(-kPi + 2.0 * kPi * (w + k / 40.0) / windows);
        }
        const auto b = harmonic_basis(angles);
        const double v = c[0] + c[1] * b[0] + c[2] * b[1] + c[3] * b[2] + c[4] * b[3];
        out.push_back({b, v * (1.0 + noise * normal(rng))});
    }
    return out;
}

TEST(HarmonicFit, ExactTraceRecovered) {
    Eigen::Matrix<double, 5, 1> c;
    c << 1.3, 0.2, -0.1, 0.5, 0.35;
    const auto fit = fit_harmonic_trace(harmonic_windows(c, 100, 0.0, 1));
    EXPECT_LT((fit.coefficients - c).norm(), 1e-10);
    EXPECT_LT(fit.residual_rms, 1e-10);
    double best = 1e9;
    double best_angle = 0.0;
    for (int k = 0; k < 200000; ++k) {
        const double t = -kPi + 2.0 * kPi * k / 200000.0;
        const double v = c[0] + c[1] * std::cos(t) + c[2] * std::sin(t) + c[3] * std::cos(2 * t) + c[4] * std::sin(2 * t);
        if (v < best) {
            best = v;
            best_angle = t;
        }
    }
    EXPECT_NEAR(fit.minimum, best, 1e-8);
    EXPECT_NEAR(wrap(fit.minimum_angle - best_angle), 0.0, 1e-4);
    EXPECT_NEAR(fit.evaluate(0.7), c[0] + c[1] * std::cos(0.7) + c[2] * std::sin(0.7) + c[3] * std::cos(1.4) +
                                       c[4] * std::sin(1.4),
                1e-10);
    EXPECT_NEAR(fit.first_harmonic_amplitude, std::hypot(0.2, -0.1), 1e-10);
}

TEST(HarmonicFit, NoisyTraceWithinErrors) {
    Eigen::Matrix<double, 5, 1> c;
    c << 1.0, 0.05, 0.0, 0.6, -0.2;
    int inside = 0;
    const int trials = 40;
    for (int t = 0; t < trials; ++t) {
        const auto fit = fit_harmonic_trace(harmonic_windows(c, 400, 0.03, 100 + t), HarmonicWeighting::relative);
        const double truth_min = [&] {
            double m = 1e9;
            for (int k = 0; k < 20000; ++k) {
                const double a = -kPi + 2.0 * kPi * k / 20000.0;
                m = std::min(m, c[0] + c[1] * std::cos(a) + c[2] * std::sin(a) + c[3] * std::cos(2 * a) +
                                    c[4] * std::sin(2 * a));
            }
            return m;
        }();
        EXPECT_GT(fit.minimum_standard_error, 0.0);
        inside += std::abs(fit.minimum - truth_min) < 2.0 * fit.minimum_standard_error ? 1 : 0;
    }
    // About 95% coverage at two standard errors.
    EXPECT_GE(inside, 33);
}

TEST(HarmonicFit, Rejects) {
    Eigen::Matrix<double, 5, 1> c;
    c << 1.0, 0.0, 0.0, 0.1, 0.0;
    const auto few = harmonic_windows(c, 5, 0.0, 1);
    EXPECT_THROW(fit_harmonic_trace(few), std::invalid_argument);
    std::vector<HarmonicSample> flat(10, HarmonicSample{harmonic_basis(std::vector<double>{0.3}), 1.0});
    EXPECT_THROW(fit_harmonic_trace(flat), std::domain_error);
    EXPECT_THROW(harmonic_basis(std::vector<double>{}), std::invalid_argument);
}

}  // namespace
}  // namespace twocolor::metrics

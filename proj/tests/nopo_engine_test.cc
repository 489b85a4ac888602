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

#include "twocolor/nopo_engine.h"

#include <algorithm>
#include <ranges>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "test_support.h"

namespace twocolor::nopo {
namespace {

OpoParams lossless(double pump_mw = 130.0) {
    OpoParams p;
    p.pump_power_mw = pump_mw;
    return p;
}

double hwhm(const OpoParams& p) { return 0.5 * p.linewidth_fwhm_hz; }

TEST(PumpParameter, Values) {
    EXPECT_NEAR(pump_parameter(130.0, 120.0), 1.040833, 1e-6);
    EXPECT_DOUBLE_EQ(pump_parameter(120.0, 120.0), 1.0);
    EXPECT_DOUBLE_EQ(pump_parameter(480.0, 120.0), 2.0);
    EXPECT_NEAR(normalized_frequency(lossless(), 63.9e6), 1.404396, 1e-6);
}

TEST(OpoParams, Validation) {
    EXPECT_NO_THROW(lossless().validate());
    EXPECT_NO_THROW(lossless(120.0).validate());
    EXPECT_THROW(lossless(119.0).validate(), std::invalid_argument);
    auto p = lossless();
    p.escape_efficiency = 1.2;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p = lossless();
    p.excess_phase_noise = -0.1;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p = lossless();
    p.extra_loss_b = -0.1;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    EXPECT_THROW(noise_input_matrix(0.99), std::invalid_argument);
}

TEST(Drift, EigenvaluesByMode) {
    for (double sigma : {1.0, pump_parameter(130.0, 120.0), 1.5, 2.0, 3.0}) {
        Eigen::SelfAdjointEigenSolver<Matrix4> es(drift_matrix(sigma));
        std::vector<double> got(es.eigenvalues().begin(), es.eigenvalues().end());
        std::vector<double> want{-2.0 * sigma, -2.0, 2.0 - 2.0 * sigma, 0.0};
        std::sort(want.begin(), want.end());
        for (int k = 0; k < 4; ++k) {
            EXPECT_NEAR(got[k], want[k], 1e-12) << "sigma=" << sigma;
        }
        for (double v : got) {
            EXPECT_LE(v, 1e-12);
        }
    }
}

TEST(Drift, ThresholdHasTwoUndampedModes) {
    Eigen::SelfAdjointEigenSolver<Matrix4> es(drift_matrix(1.0));
    int zeros = 0;
    for (double v : es.eigenvalues()) {
        zeros += std::abs(v) < 1e-12 ? 1 : 0;
    }
    EXPECT_EQ(zeros, 2);
}

TEST(Drift, DifferenceSumBasisDiagonalizes) {
    const Matrix4 t = difference_sum_basis();
    EXPECT_TRUE((t * t.transpose()).isIdentity(1e-14));
    for (double sigma : {1.0, 1.2, 2.5}) {
        const Matrix4 d = t * drift_matrix(sigma) * t.transpose();
        Matrix4 want = Eigen::Vector4d(-2.0, 2.0 - 2.0 * sigma, 0.0, -2.0 * sigma).asDiagonal();
        EXPECT_TRUE(d.isApprox(want, 1e-13) || (d - want).norm() < 1e-13);
        const InputMatrix b = t * noise_input_matrix(sigma);
        // Pump noise reaches only the sum quadratures.
        EXPECT_NEAR(b.row(0).tail<2>().norm(), 0.0, 1e-14);
        EXPECT_NEAR(b.row(2).tail<2>().norm(), 0.0, 1e-14);
    }
}

TEST(Spectra, MatchDecoupledModes) {
    const OpoParams p = lossless();
    const double sigma = pump_parameter(p);
    for (double omega : {0.1, 0.5, 1.0, 1.404396, 3.0, 10.0}) {
        const double f = omega * hwhm(p);
        const auto s = quadrature_spectra(p, f);
        EXPECT_NEAR(s.omega_norm, omega, 1e-12);
        EXPECT_NEAR(s.v_diff, omega * omega / (omega * omega + 4.0), 1e-12);
        EXPECT_NEAR(s.v_sum, 1.0 - 4.0 / (omega * omega + 4.0 * sigma * sigma), 1e-12);
        const Eigen::Matrix4d want = testing::lossless_opo_covariance(sigma, omega);
        EXPECT_TRUE(sideband_state(p, f).cov().isApprox(want, 1e-10)) << "omega=" << omega;
    }
}

TEST(Spectra, LossDressing) {
    OpoParams p = lossless(200.0);
    p.escape_efficiency = 0.6;
    p.excess_phase_noise = 0.3;
    p.extra_loss_a = 0.1;
    p.extra_loss_b = 0.25;
    const double sigma = pump_parameter(p);
    const Eigen::Vector4d cd = difference_combination();
    const Eigen::Vector4d cs = sum_combination();
    for (double omega : {0.3, 1.4, 4.0}) {
        const double f = omega * hwhm(p);
        const Eigen::Matrix4d want = testing::dressed_opo_covariance(sigma, omega, 0.6, 0.3, 0.1, 0.25);
        EXPECT_TRUE(sideband_state(p, f).cov().isApprox(want, 1e-10));
        const auto s = quadrature_spectra(p, f);
        EXPECT_NEAR(s.v_diff, cd.dot(want * cd), 1e-10);
        EXPECT_NEAR(s.v_sum, cs.dot(want * cs), 1e-10);
        const Eigen::Vector4d c(0.3, -0.2, 0.9, 0.1);
        EXPECT_NEAR(combination_spectrum(p, f, c), c.dot(want * c), 1e-10);
    }
}

TEST(Spectra, Limits) {
    OpoParams p = lossless();
    const auto far = quadrature_spectra(p, 1e13);
    EXPECT_NEAR(far.v_diff, 1.0, 1e-6);
    EXPECT_NEAR(far.v_sum, 1.0, 1e-6);

    p.escape_efficiency = 0.0;
    p.excess_phase_noise = 0.2;
    const auto dark = quadrature_spectra(p, 63.9e6);
    EXPECT_NEAR(dark.v_diff, 1.0, 1e-12);
    EXPECT_NEAR(dark.v_sum, 1.2, 1e-12);

    const OpoParams q = lossless();
    const auto dc = quadrature_spectra(q, 0.0);
    EXPECT_NEAR(dc.v_diff, 0.0, 1e-12);
    EXPECT_NEAR(dc.v_sum, 1.0 - 1.0 / pump_parameter(q) / pump_parameter(q), 1e-12);
    const Eigen::Vector4d p_minus(0.0, 1.0, 0.0, -1.0);
    EXPECT_EQ(combination_spectrum(q, 0.0, p_minus), std::numeric_limits<double>::infinity());
    EXPECT_THROW(sideband_state(q, 0.0), std::invalid_argument);
}

TEST(Spectra, ProductBoundAndPositivity) {
    for (double pump : {120.0, 130.0, 300.0}) {
        for (double omega : {0.2, 1.0, 5.0}) {
            OpoParams p = lossless(pump);
            const auto s = quadrature_spectra(p, omega * hwhm(p));
            EXPECT_GT(s.v_diff, 0.0);
            EXPECT_GT(s.v_sum, 0.0);
            EXPECT_LT(s.v_diff, 1.0);
            EXPECT_GE(sideband_state(p, omega * hwhm(p)).symplectic_eigenvalues().front(), 1.0 - 1e-9);
        }
    }
}

TEST(Langevin, EmptyCavityIsVacuum) {
    LinearLangevinModel empty{-Eigen::MatrixXd::Identity(2, 2), std::sqrt(2.0) * Eigen::MatrixXd::Identity(2, 2)};
    const std::size_t n = 400000;
    double acc[2] = {0.0, 0.0};
    integrate_linear_langevin(empty, 0.02, n, 7, [&](std::span<const double> y) {
        acc[0] += y[0] * y[0];
        acc[1] += y[1] * y[1];
    });
    for (double a : acc) {
        EXPECT_NEAR(a / n, 1.0, 4.0 * std::sqrt(2.0 / n));
    }
}

TEST(Langevin, Validation) {
    LinearLangevinModel bad{Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 1)};
    auto sink = [](std::span<const double>) {};
    EXPECT_THROW(integrate_linear_langevin(bad, 0.01, 10, 1, sink), std::invalid_argument);
    auto model = opo_langevin_model(1.1);
    EXPECT_THROW(integrate_linear_langevin(model, 0.05, 10, 1, sink), std::invalid_argument);
    EXPECT_THROW(integrate_linear_langevin(model, 0.0, 10, 1, sink), std::invalid_argument);
    EXPECT_EQ(model.drift.rows(), 4);
    EXPECT_EQ(model.noise_input.cols(), 6);
}

TEST(Langevin, Deterministic) {
    const OpoParams p = lossless();
    const double dt = 0.02 / amplitude_decay_rate(p);
    const auto a = langevin_oracle(p, 5000 * dt, dt, 11);
    const auto b = langevin_oracle(p, 5000 * dt, dt, 11);
    const auto c = langevin_oracle(p, 5000 * dt, dt, 12);
    ASSERT_EQ(a.difference.size(), 5000u);
    EXPECT_TRUE(std::ranges::equal(a.difference.samples(), b.difference.samples()));
    EXPECT_TRUE(std::ranges::equal(a.sum.samples(), b.sum.samples()));
    EXPECT_FALSE(std::ranges::equal(a.sum.samples(), c.sum.samples()));
}

TEST(Langevin, WelchMatchesAnalytic) {
    OpoParams p = lossless();
    p.escape_efficiency = 0.7;
    p.excess_phase_noise = 0.1;
    p.extra_loss_a = 0.05;
    const double dt = 0.02 / amplitude_decay_rate(p);
    const auto rec = langevin_oracle(p, 2e6 * dt, dt, 2024);
    const auto cmp = compare_oracle_spectra(p, rec, 2048, 0.2, 5.0);
    EXPECT_GT(cmp.bins, 25u);
    EXPECT_LT(cmp.rms_error, 0.04);
    EXPECT_THROW(compare_oracle_spectra(p, rec, 2048, 1e6, 2e6), std::invalid_argument);
}

TEST(Fit, LosslessClosedForm) {
    const OpoParams base = lossless();
    const FitTargets t{0.75, 0.89, 63.9e6};
    const auto r = fit_to_measurement(t, base);
    const double omega = normalized_frequency(base, t.frequency_hz);
    const double sigma = pump_parameter(base);
    const double eta = (1.0 - t.v_diff) * (omega * omega + 4.0) / 4.0;
    const double floor = eta * (1.0 - 4.0 / (omega * omega + 4.0 * sigma * sigma)) + 1.0 - eta;
    EXPECT_NEAR(r.params.escape_efficiency, eta, 1e-9);
    EXPECT_NEAR(r.params.excess_phase_noise, t.v_sum - floor, 1e-9);
    EXPECT_LT(r.residual_diff, 1e-9);
    EXPECT_LT(r.residual_sum, 1e-9);
}

TEST(Fit, RoundTrip) {
    OpoParams truth = lossless(150.0);
    truth.escape_efficiency = 0.55;
    truth.excess_phase_noise = 0.12;
    truth.extra_loss_a = 0.2;
    truth.extra_loss_b = 0.3;
    const auto s = quadrature_spectra(truth, 50e6);
    OpoParams base = truth;
    base.escape_efficiency = 1.0;
    base.excess_phase_noise = 0.0;
    const auto r = fit_to_measurement({s.v_diff, s.v_sum, 50e6}, base);
    EXPECT_NEAR(r.params.escape_efficiency, 0.55, 1e-9);
    EXPECT_NEAR(r.params.excess_phase_noise, 0.12, 1e-9);
    EXPECT_DOUBLE_EQ(r.params.extra_loss_b, 0.3);
}

TEST(Fit, Unreachable) {
    const OpoParams base = lossless();
    try {
        fit_to_measurement({0.1, 0.89, 63.9e6}, base);
        FAIL() << "expected FitUnreachable";
    } catch (const FitUnreachable& e) {
        const double omega = normalized_frequency(base, 63.9e6);
        EXPECT_NEAR(e.extremum().v_diff, omega * omega / (omega * omega + 4.0), 1e-12);
    }
    try {
        fit_to_measurement({0.75, 0.5, 63.9e6}, base);
        FAIL() << "expected FitUnreachable";
    } catch (const FitUnreachable& e) {
        EXPECT_GT(e.extremum().v_sum, 0.5);
        EXPECT_NEAR(e.extremum().v_diff, 0.75, 1e-9);
    }
    EXPECT_THROW(fit_to_measurement({1.2, 0.89, 63.9e6}, base), FitUnreachable);
    EXPECT_THROW(fit_to_measurement({0.0, 0.89, 63.9e6}, base), std::invalid_argument);
}

}  // namespace
}  // namespace twocolor::nopo

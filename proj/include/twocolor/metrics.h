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

#ifndef TWOCOLOR_METRICS_H
#define TWOCOLOR_METRICS_H

#include <array>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "twocolor/gaussian_core.h"

namespace twocolor::metrics {

/// Two-mode inseparability I = (V(X_A - X_B) + V(X_A^perp + X_B^perp)) / 4.
struct InseparabilityResult {
    double v_diff_half = 0.0;
    double v_sum_half = 0.0;
    double I = 0.0;
    double db = 0.0;
    bool entangled = false;
    double angle_a = 0.0;
    double angle_b = 0.0;
};

/// Takes full (not halved) variances. Throws on negative input.
InseparabilityResult inseparability(double v_diff, double v_sum);

/// 10 log10(ratio); throws std::domain_error for ratio <= 0.
double to_db(double ratio);

/// V(X_A(theta_a) - X_B(theta_b)) of a two-mode state.
double difference_variance(const gaussian::GaussianState& state, double theta_a, double theta_b);

/// V(X_A(theta_a + pi/2) + X_B(theta_b + pi/2)).
double sum_variance(const gaussian::GaussianState& state, double theta_a, double theta_b);

struct OptimalAngles {
    double theta_a;
    double theta_b;
    InseparabilityResult result;
};

/// Minimizes V(X_A(theta_a) - X_B(theta_b)) on a 721 x 721 grid over
/// [-pi, pi], then refines each angle by golden-section search. Ties on the
/// grid go to the smallest |theta_b|, then the smallest |theta_a|.
OptimalAngles optimal_angles(const gaussian::GaussianState& state);

enum class FixedSide { alice, bob };

struct TracePoint {
    double angle;          // the ramped angle
    double v_a;            // V(X_A)
    double v_b;            // V(X_B)
    double combined_half;  // V(X_A - X_B) / 2
};

/// Individual and combined variances while one side's angle is ramped and
/// the other is held at fixed_angle.
std::vector<TracePoint> scan_trace(const gaussian::GaussianState& state, std::span<const double> ramp,
                                   double fixed_angle, FixedSide which_fixed);

// ---------------------------------------------------------------------------
// Harmonic model of measured traces.

/// One measured window: the window averages of cos(theta), sin(theta),
/// cos(2 theta), sin(2 theta) over the angles swept during the window, and
/// the variance measured in it.
struct HarmonicSample {
    std::array<double, 4> basis;
    double value;
};

/// Window averages of the harmonic basis over the given angle samples.
std::array<double, 4> harmonic_basis(std::span<const double> angles);

struct HarmonicFit {
    /// c0, a1, b1, a2, b2 of c0 + a1 cos + b1 sin + a2 cos 2 + b2 sin 2.
    Eigen::Matrix<double, 5, 1> coefficients;
    Eigen::Matrix<double, 5, 5> covariance;
    double minimum;
    double minimum_angle;
    double minimum_standard_error;
    double first_harmonic_amplitude;
    double first_harmonic_standard_error;
    double residual_rms;

    double evaluate(double theta) const;
};

enum class HarmonicWeighting {
    uniform,
    /// Scatter proportional to the value, as for sample variances of
    /// Gaussian data: iteratively reweighted by 1 / fitted^2.
    relative,
};

/// Least-squares fit of a variance trace to harmonics up to the second. Any
/// quadratic form in (cos theta, sin theta) plus a linear term is captured
/// exactly, so window-to-window scatter is pure measurement noise. The
/// covariance is scaled by the observed residual scatter.
HarmonicFit fit_harmonic_trace(std::span<const HarmonicSample> samples,
                               HarmonicWeighting weighting = HarmonicWeighting::uniform);

}  // namespace twocolor::metrics

#endif  // TWOCOLOR_METRICS_H

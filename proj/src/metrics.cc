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
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace twocolor::metrics {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kGridPoints = 721;
constexpr double kAngleTolerance = 1e-6;

void require_two_modes(const gaussian::GaussianState& state) {
    if (state.n_modes() != 2) {
        throw std::invalid_argument("expected a two-mode state");
    }
}

double wrap_angle(double theta) {
    double w = std::remainder(theta, 2.0 * kPi);
    return w <= -kPi ? w + 2.0 * kPi : w;
}

double golden_section(const std::function<double(double)>& f, double lo, double hi, double tol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - inv_phi * (hi - lo);
    double d = lo + inv_phi * (hi - lo);
    double fc = f(c);
    double fd = f(d);
    while (hi - lo > tol) {
        if (fc <= fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    return 0.5 * (lo + hi);
}

Eigen::Matrix<double, 5, 1> basis_at(double theta) {
    Eigen::Matrix<double, 5, 1> g;
    g << 1.0, std::cos(theta), std::sin(theta), std::cos(2.0 * theta), std::sin(2.0 * theta);
    return g;
}

}  // namespace

InseparabilityResult inseparability(double v_diff, double v_sum) {
    if (!(v_diff >= 0.0) || !(v_sum >= 0.0)) {
        throw std::invalid_argument("variances must be non-negative");
    }
    InseparabilityResult r;
    r.v_diff_half = 0.5 * v_diff;
    r.v_sum_half = 0.5 * v_sum;
    r.I = 0.5 * (r.v_diff_half + r.v_sum_half);
    r.db = r.I > 0.0 ? to_db(r.I) : -std::numeric_limits<double>::infinity();
    r.entangled = r.I < 1.0;
    return r;
}

double to_db(double ratio) {
    if (!(ratio > 0.0)) {
        throw std::domain_error("dB conversion needs a positive ratio");
    }
    return 10.0 * std::log10(ratio);
}

double difference_variance(const gaussian::GaussianState& state, double theta_a, double theta_b) {
    require_two_modes(state);
    gaussian::Vector c = gaussian::quadrature_vector(2, 0, theta_a) - gaussian::quadrature_vector(2, 1, theta_b);
    return gaussian::joint_variance(state, c);
}

double sum_variance(const gaussian::GaussianState& state, double theta_a, double theta_b) {
    require_two_modes(state);
    gaussian::Vector c = gaussian::quadrature_vector(2, 0, theta_a + 0.5 * kPi) +
                         gaussian::quadrature_vector(2, 1, theta_b + 0.5 * kPi);
    return gaussian::joint_variance(state, c);
}

OptimalAngles optimal_angles(const gaussian::GaussianState& state) {
    require_two_modes(state);
    const Eigen::Matrix4d cov = state.cov();
    auto diff = [&cov](double ta, double tb) {
        Eigen::Vector4d c(std::cos(ta), std::sin(ta), -std::cos(tb), -std::sin(tb));
        return c.dot(cov * c);
    };

    const double step = 2.0 * kPi / (kGridPoints - 1);
    std::vector<double> grid(static_cast<std::size_t>(kGridPoints) * kGridPoints);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < kGridPoints; ++i) {
        for (int j = 0; j < kGridPoints; ++j) {
            const double v = diff(-kPi + step * i, -kPi + step * j);
            grid[static_cast<std::size_t>(i) * kGridPoints + j] = v;
            best = std::min(best, v);
        }
    }
    // Among grid points within rounding of the minimum, prefer the smallest
    // |theta_b|, then the smallest |theta_a|.
    const double tie = 1e-12 * std::max(1.0, std::abs(best));
    double best_a = 0.0;
    double best_b = 0.0;
    bool found = false;
    for (int i = 0; i < kGridPoints; ++i) {
        const double ta = -kPi + step * i;
        for (int j = 0; j < kGridPoints; ++j) {
            const double tb = -kPi + step * j;
            if (grid[static_cast<std::size_t>(i) * kGridPoints + j] > best + tie) {
                continue;
            }
            const bool better_b = std::abs(tb) < std::abs(best_b) - 1e-15;
            const bool same_b = std::abs(std::abs(tb) - std::abs(best_b)) <= 1e-15;
            if (!found || better_b || (same_b && std::abs(ta) < std::abs(best_a) - 1e-15)) {
                best_a = ta;
                best_b = tb;
                found = true;
            }
        }
    }
    const double grid_value = diff(best_a, best_b);

    // Coordinate refinement, Alice first: along a degenerate valley this keeps
    // Bob on the grid angle chosen by the tie-break.
    double ta = best_a;
    double tb = best_b;
    for (int sweep = 0; sweep < 50; ++sweep) {
        const double prev_a = ta;
        const double prev_b = tb;
        ta = golden_section([&](double x) { return diff(x, tb); }, ta - step, ta + step, kAngleTolerance * 1e-2);
        tb = golden_section([&](double x) { return diff(ta, x); }, tb - step, tb + step, kAngleTolerance * 1e-2);
        if (std::abs(ta - prev_a) < kAngleTolerance && std::abs(tb - prev_b) < kAngleTolerance) {
            break;
        }
    }
    if (!(diff(ta, tb) <= grid_value)) {
        ta = best_a;
        tb = best_b;
    }
    ta = wrap_angle(ta);
    tb = wrap_angle(tb);

    OptimalAngles out{ta, tb, inseparability(difference_variance(state, ta, tb), sum_variance(state, ta, tb))};
    out.result.angle_a = ta;
    out.result.angle_b = tb;
    return out;
}

std::vector<TracePoint> scan_trace(const gaussian::GaussianState& state, std::span<const double> ramp,
                                   double fixed_angle, FixedSide which_fixed) {
    require_two_modes(state);
    if (ramp.empty()) {
        throw std::invalid_argument("scan ramp is empty");
    }
    std::vector<TracePoint> out;
    out.reserve(ramp.size());
    for (double angle : ramp) {
        const double ta = which_fixed == FixedSide::bob ? angle : fixed_angle;
        const double tb = which_fixed == FixedSide::bob ? fixed_angle : angle;
        out.push_back({angle, gaussian::homodyne_variance(state, 0, ta), gaussian::homodyne_variance(state, 1, tb),
                       0.5 * difference_variance(state, ta, tb)});
    }
    return out;
}

std::array<double, 4> harmonic_basis(std::span<const double> angles) {
    if (angles.empty()) {
        throw std::invalid_argument("no angles to average");
    }
    std::array<double, 4> acc{};
    for (double t : angles) {
        acc[0] += std::cos(t);
        acc[1] += std::sin(t);
        acc[2] += std::cos(2.0 * t);
        acc[3] += std::sin(2.0 * t);
    }
    for (double& v : acc) {
        v /= static_cast<double>(angles.size());
    }
    return acc;
}

double HarmonicFit::evaluate(double theta) const { return basis_at(theta).dot(coefficients); }

HarmonicFit fit_harmonic_trace(std::span<const HarmonicSample> samples, HarmonicWeighting weighting) {
    const auto n = static_cast<Eigen::Index>(samples.size());
    if (n < 6) {
        throw std::invalid_argument("harmonic fit needs at least six windows");
    }
    Eigen::MatrixXd x(n, 5);
    Eigen::VectorXd y(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto& s = samples[static_cast<std::size_t>(k)];
        x(k, 0) = 1.0;
        for (int j = 0; j < 4; ++j) {
            x(k, j + 1) = s.basis[static_cast<std::size_t>(j)];
        }
        y[k] = s.value;
    }

    Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
    HarmonicFit fit;
    Eigen::Matrix<double, 5, 5> inv_gram;
    const int passes = weighting == HarmonicWeighting::relative ? 3 : 1;
    for (int pass = 0; pass < passes; ++pass) {
        if (pass > 0) {
            const Eigen::VectorXd pred = x * fit.coefficients;
            const double floor = 1e-3 * pred.cwiseAbs().maxCoeff();
            for (Eigen::Index k = 0; k < n; ++k) {
                const double v = std::max(pred[k], floor);
                w[k] = 1.0 / (v * v);
            }
        }
        const Eigen::MatrixXd xw = w.asDiagonal() * x;
        Eigen::Matrix<double, 5, 5> gram = x.transpose() * xw;
        Eigen::LDLT<Eigen::Matrix<double, 5, 5>> ldlt(gram);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || std::abs(gram.determinant()) < 1e-300) {
            throw std::domain_error("harmonic fit is degenerate; the ramp does not cover enough angles");
        }
        fit.coefficients = ldlt.solve(xw.transpose() * y);
        inv_gram = ldlt.solve(Eigen::Matrix<double, 5, 5>::Identity());
    }
    const Eigen::VectorXd resid = y - x * fit.coefficients;
    const double s2 = resid.cwiseProduct(resid).dot(w) / static_cast<double>(n - 5);
    fit.residual_rms = std::sqrt(resid.squaredNorm() / static_cast<double>(n));
    fit.covariance = s2 * inv_gram;

    // Global minimum: dense scan, then golden-section polish.
    constexpr int kScan = 3600;
    double best_t = -kPi;
    double best_v = std::numeric_limits<double>::infinity();
    for (int k = 0; k < kScan; ++k) {
        const double t = -kPi + 2.0 * kPi * k / kScan;
        const double v = fit.evaluate(t);
        if (v < best_v) {
            best_v = v;
            best_t = t;
        }
    }
    const double h = 2.0 * kPi / kScan;
    best_t = golden_section([&fit](double t) { return fit.evaluate(t); }, best_t - h, best_t + h, 1e-10);
    fit.minimum_angle = wrap_angle(best_t);
    fit.minimum = fit.evaluate(best_t);
    const auto g = basis_at(best_t);
    fit.minimum_standard_error = std::sqrt(g.dot(fit.covariance * g));

    fit.first_harmonic_amplitude = std::hypot(fit.coefficients[1], fit.coefficients[2]);
    Eigen::Matrix2d c1 = fit.covariance.block<2, 2>(1, 1);
    fit.first_harmonic_standard_error = std::sqrt(Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(c1).eigenvalues().maxCoeff());
    return fit;
}

}  // namespace twocolor::metrics

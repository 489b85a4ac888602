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
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/tools/roots.hpp>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>

#include "twocolor/spectral.h"

namespace twocolor::nopo {

namespace {

using Complex = std::complex<double>;
using ComplexMatrix4 = Eigen::Matrix<Complex, 4, 4>;
using ComplexVector4 = Eigen::Matrix<Complex, 4, 1>;

bool in_unit_interval(double v) { return v >= 0.0 && v <= 1.0; }

// Spectral density u^T S u of the lossless output, S = T T^dagger with
// T = sqrt(2) (i Omega - M)^{-1} B - [I 0]. Solved row-wise: y^T = u^T (i Omega - M)^{-1}.
double lossless_density(double sigma, double omega, const Eigen::Vector4d& u) {
    const Matrix4 m = drift_matrix(sigma);
    const InputMatrix b = noise_input_matrix(sigma);
    ComplexVector4 y;
    if (omega == 0.0) {
        Matrix4 a = -m.transpose();
        Eigen::CompleteOrthogonalDecomposition<Matrix4> cod(a);
        Eigen::Vector4d yr = cod.solve(u);
        if ((a * yr - u).norm() > 1e-9 * std::max(1.0, u.norm())) {
            return std::numeric_limits<double>::infinity();
        }
        y = yr.cast<Complex>();
    } else {
        ComplexMatrix4 a = Complex(0.0, omega) * ComplexMatrix4::Identity() - m.cast<Complex>();
        y = a.transpose().partialPivLu().solve(u.cast<Complex>());
    }
    double total = 0.0;
    for (int j = 0; j < 6; ++j) {
        Complex r = std::sqrt(2.0) * (y.transpose() * b.col(j).cast<Complex>())(0);
        if (j < 4) {
            r -= u[j];
        }
        total += std::norm(r);
    }
    return total;
}

Eigen::Vector4d arm_amplitudes(const OpoParams& p) {
    double ta = std::sqrt(1.0 - p.extra_loss_a);
    double tb = std::sqrt(1.0 - p.extra_loss_b);
    return {ta, ta, tb, tb};
}

// Lossless output cross-spectral matrix Re(T T^dagger).
Matrix4 lossless_covariance(double sigma, double omega) {
    const Matrix4 m = drift_matrix(sigma);
    const InputMatrix b = noise_input_matrix(sigma);
    ComplexMatrix4 a = Complex(0.0, omega) * ComplexMatrix4::Identity() - m.cast<Complex>();
    Eigen::Matrix<Complex, 4, 6> t = std::sqrt(2.0) * a.partialPivLu().solve(b.cast<Complex>());
    t.leftCols<4>() -= ComplexMatrix4::Identity();
    Matrix4 s = (t * t.adjoint()).real();
    return 0.5 * (s + s.transpose());
}

}  // namespace

void OpoParams::validate() const {
    if (!(threshold_power_mw > 0.0) || !std::isfinite(threshold_power_mw)) {
        throw std::invalid_argument("threshold power must be positive");
    }
    if (!(pump_power_mw >= threshold_power_mw) || !std::isfinite(pump_power_mw)) {
        throw std::invalid_argument("pump power must be at or above threshold");
    }
    if (!(linewidth_fwhm_hz > 0.0) || !std::isfinite(linewidth_fwhm_hz)) {
        throw std::invalid_argument("linewidth must be positive");
    }
    if (!in_unit_interval(escape_efficiency)) {
        throw std::invalid_argument("escape efficiency must lie in [0, 1]");
    }
    if (!in_unit_interval(extra_loss_a) || !in_unit_interval(extra_loss_b)) {
        throw std::invalid_argument("extra losses must lie in [0, 1]");
    }
    if (!(excess_phase_noise >= 0.0) || !std::isfinite(excess_phase_noise)) {
        throw std::invalid_argument("excess phase noise must be non-negative");
    }
}

double pump_parameter(double pump_power_mw, double threshold_power_mw) {
    if (!(threshold_power_mw > 0.0) || !(pump_power_mw >= 0.0)) {
        throw std::invalid_argument("pump and threshold powers must be positive");
    }
    return std::sqrt(pump_power_mw / threshold_power_mw);
}

double pump_parameter(const OpoParams& params) {
    return pump_parameter(params.pump_power_mw, params.threshold_power_mw);
}

double amplitude_decay_rate(const OpoParams& params) { return std::numbers::pi * params.linewidth_fwhm_hz; }

double normalized_frequency(const OpoParams& params, double f_hz) {
    return f_hz / (0.5 * params.linewidth_fwhm_hz);
}

Matrix4 drift_matrix(double sigma) {
    const double c = 2.0 - sigma;
    Matrix4 m;
    // clang-format off
    m << -sigma,    0.0,      c,    0.0,
            0.0, -sigma,    0.0, -sigma,
              c,    0.0, -sigma,    0.0,
            0.0, -sigma,    0.0, -sigma;
    // clang-format on
    return m;
}

Matrix4 drift_matrix(const OpoParams& params) { return drift_matrix(pump_parameter(params)); }

InputMatrix noise_input_matrix(double sigma) {
    if (sigma < 1.0) {
        throw std::invalid_argument("noise input defined for sigma >= 1");
    }
    InputMatrix b = InputMatrix::Zero();
    b.leftCols<4>() = std::sqrt(2.0) * Matrix4::Identity();
    // Pump fluctuations enter through the depleted pump amplitude.
    const double g = std::sqrt(2.0 * (sigma - 1.0));
    b(0, 4) = g;
    b(2, 4) = g;
    b(1, 5) = g;
    b(3, 5) = g;
    return b;
}

Matrix4 difference_sum_basis() {
    const double h = 1.0 / std::sqrt(2.0);
    Matrix4 t;
    // clang-format off
    t << h, 0.0, -h, 0.0,
         h, 0.0,  h, 0.0,
         0.0, h, 0.0, -h,
         0.0, h, 0.0,  h;
    // clang-format on
    return t;
}

Eigen::Vector4d difference_combination() {
    const double h = 1.0 / std::sqrt(2.0);
    return {h, 0.0, -h, 0.0};
}

Eigen::Vector4d sum_combination() {
    const double h = 1.0 / std::sqrt(2.0);
    return {0.0, h, 0.0, h};
}

double combination_spectrum(const OpoParams& params, double f_hz, const Eigen::Vector4d& c) {
    params.validate();
    if (!(f_hz >= 0.0)) {
        throw std::invalid_argument("sideband frequency must be non-negative");
    }
    const double sigma = pump_parameter(params);
    const double omega = normalized_frequency(params, f_hz);
    const Eigen::Vector4d d = arm_amplitudes(params);
    const Eigen::Vector4d u = d.cwiseProduct(c);
    const double eta = params.escape_efficiency;

    double s = lossless_density(sigma, omega, u);
    if (!std::isfinite(s)) {
        return s;
    }
    const double along_sum = sum_combination().dot(u);
    double v = eta * s + (1.0 - eta) * u.squaredNorm() + params.excess_phase_noise * along_sum * along_sum;
    v += c.dot((Eigen::Vector4d::Ones() - d.cwiseProduct(d)).cwiseProduct(c));
    return v;
}

QuadratureSpectra quadrature_spectra(const OpoParams& params, double f_hz) {
    return {normalized_frequency(params, f_hz), combination_spectrum(params, f_hz, difference_combination()),
            combination_spectrum(params, f_hz, sum_combination())};
}

gaussian::GaussianState sideband_state(const OpoParams& params, double f_hz) {
    params.validate();
    if (!(f_hz > 0.0)) {
        throw std::invalid_argument("sideband state needs f > 0");
    }
    const double sigma = pump_parameter(params);
    const double omega = normalized_frequency(params, f_hz);
    const double eta = params.escape_efficiency;
    const Eigen::Vector4d cs = sum_combination();
    Matrix4 sigma_src = eta * lossless_covariance(sigma, omega) + (1.0 - eta) * Matrix4::Identity() +
                        params.excess_phase_noise * cs * cs.transpose();
    const Eigen::Vector4d d = arm_amplitudes(params);
    Matrix4 cov = d.asDiagonal() * sigma_src * d.asDiagonal();
    cov.diagonal() += Eigen::Vector4d::Ones() - d.cwiseProduct(d);
    return gaussian::GaussianState(Eigen::VectorXd::Zero(4), cov);
}

LinearLangevinModel opo_langevin_model(double sigma) {
    return {drift_matrix(sigma), noise_input_matrix(sigma)};
}

void integrate_linear_langevin(const LinearLangevinModel& model, double kappa_dt, std::size_t steps,
                               std::uint64_t seed, const OutputSink& sink) {
    const auto n = model.drift.rows();
    const auto m = model.noise_input.cols();
    if (model.drift.cols() != n || model.noise_input.rows() != n || m < n) {
        throw std::invalid_argument("inconsistent Langevin model dimensions");
    }
    if (!(kappa_dt > 0.0) || !(kappa_dt < 0.05)) {
        throw std::invalid_argument("kappa * dt must lie in (0, 0.05)");
    }

    boost::random::mt19937_64 rng(seed);
    boost::random::normal_distribution<double> normal;
    const double h = kappa_dt;
    const double sh = std::sqrt(h);
    const Eigen::MatrixXd step = Eigen::MatrixXd::Identity(n, n) + h * model.drift;
    const Eigen::MatrixXd kick = sh * model.noise_input;

    Eigen::VectorXd q = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd next(n);
    Eigen::VectorXd xi(m);
    std::vector<double> out(static_cast<std::size_t>(n));

    // Burn in over several decay times of the slowest damped mode.
    const std::size_t burn_in = static_cast<std::size_t>(std::ceil(20.0 / h));
    for (std::size_t k = 0; k < burn_in + steps; ++k) {
        for (Eigen::Index j = 0; j < m; ++j) {
            xi[j] = normal(rng);
        }
        next.noalias() = step * q;
        next.noalias() += kick * xi;
        if (k >= burn_in) {
            // Bin-averaged output; the trapezoid keeps the correlation between
            // the reflected input and the intracavity response right to O(h).
            for (Eigen::Index j = 0; j < n; ++j) {
                out[static_cast<std::size_t>(j)] = std::sqrt(2.0) * sh * 0.5 * (q[j] + next[j]) - xi[j];
            }
            sink(out);
        }
        q.swap(next);
    }
}

LangevinRecord langevin_oracle(const OpoParams& params, double duration_s, double dt_s, std::uint64_t seed) {
    params.validate();
    if (!(dt_s > 0.0) || !(duration_s > 0.0)) {
        throw std::invalid_argument("duration and time step must be positive");
    }
    const double kappa_dt = amplitude_decay_rate(params) * dt_s;
    const auto steps = static_cast<std::size_t>(std::llround(duration_s / dt_s));

    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    std::array<std::uint64_t, 2> seeds;
    {
        std::array<std::uint32_t, 4> words;
        seq.generate(words.begin(), words.end());
        seeds[0] = (std::uint64_t{words[0]} << 32) | words[1];
        seeds[1] = (std::uint64_t{words[2]} << 32) | words[3];
    }
    boost::random::mt19937_64 loss_rng(seeds[1]);
    boost::random::normal_distribution<double> normal;

    const double eta = params.escape_efficiency;
    const double se = std::sqrt(eta);
    const double sl = std::sqrt(1.0 - eta);
    const double sx = std::sqrt(params.excess_phase_noise / 2.0);
    const Eigen::Vector4d d = arm_amplitudes(params);
    const Eigen::Vector4d leak = (Eigen::Vector4d::Ones() - d.cwiseProduct(d)).cwiseSqrt();
    const Eigen::Vector4d cd = difference_combination();
    const Eigen::Vector4d cs = sum_combination();

    std::vector<double> diff;
    std::vector<double> sum;
    diff.reserve(steps);
    sum.reserve(steps);
    integrate_linear_langevin(
        opo_langevin_model(pump_parameter(params)), kappa_dt, steps, seeds[0],
        [&](std::span<const double> y) {
            Eigen::Vector4d v;
            for (int j = 0; j < 4; ++j) {
                v[j] = se * y[static_cast<std::size_t>(j)] + sl * normal(loss_rng);
            }
            const double g = sx * normal(loss_rng);
            v[1] += g;
            v[3] += g;
            for (int j = 0; j < 4; ++j) {
                v[j] = d[j] * v[j] + leak[j] * normal(loss_rng);
            }
            diff.push_back(cd.dot(v));
            sum.push_back(cs.dot(v));
        });
    const double rate = 1.0 / dt_s;
    return {detection::TimeSeries(rate, std::move(diff), detection::SampleUnit::quadrature_norm),
            detection::TimeSeries(rate, std::move(sum), detection::SampleUnit::quadrature_norm)};
}

OracleComparison compare_oracle_spectra(const OpoParams& params, const LangevinRecord& record,
                                        std::size_t segment_length, double omega_min, double omega_max) {
    const auto pd = detection::welch_psd(record.difference, segment_length, segment_length / 2);
    const auto ps = detection::welch_psd(record.sum, segment_length, segment_length / 2);
    OracleComparison out;
    double acc_d = 0.0;
    double acc_s = 0.0;
    for (std::size_t b = 0; b < pd.frequency_hz.size(); ++b) {
        const double f = pd.frequency_hz[b];
        const double omega = normalized_frequency(params, f);
        if (omega < omega_min || omega > omega_max) {
            continue;
        }
        const auto ref = quadrature_spectra(params, f);
        const double ed = pd.density[b] - ref.v_diff;
        const double es = ps.density[b] - ref.v_sum;
        acc_d += ed * ed;
        acc_s += es * es;
        out.max_abs_error = std::max({out.max_abs_error, std::abs(ed), std::abs(es)});
        ++out.bins;
    }
    if (out.bins == 0) {
        throw std::invalid_argument("no Welch bins inside the comparison band");
    }
    const double nb = static_cast<double>(out.bins);
    out.rms_error_diff = std::sqrt(acc_d / nb);
    out.rms_error_sum = std::sqrt(acc_s / nb);
    out.rms_error = std::sqrt((acc_d + acc_s) / (2.0 * nb));
    return out;
}

namespace {

// Root of a monotone function on [lo, hi] with explicit endpoint handling.
double bracketed_root(const std::function<double(double)>& f, double lo, double hi) {
    const double flo = f(lo);
    const double fhi = f(hi);
    if (flo == 0.0) {
        return lo;
    }
    if (fhi == 0.0) {
        return hi;
    }
    boost::uintmax_t iters = 200;
    auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi,
                                                    boost::math::tools::eps_tolerance<double>(50), iters);
    return 0.5 * (a + b);
}

}  // namespace

FitResult fit_to_measurement(const FitTargets& targets, const OpoParams& base) {
    base.validate();
    if (!(targets.v_diff > 0.0) || !(targets.v_sum > 0.0) || !(targets.frequency_hz > 0.0)) {
        throw std::invalid_argument("fit targets must be positive");
    }
    OpoParams p = base;
    p.excess_phase_noise = 0.0;
    auto v_diff_at = [&](double eta) {
        p.escape_efficiency = eta;
        return quadrature_spectra(p, targets.frequency_hz).v_diff - targets.v_diff;
    };

    // v_diff is affine in the efficiency; its range is [v_diff(1), v_diff(0)].
    const double d_lo = v_diff_at(1.0);
    const double d_hi = v_diff_at(0.0);
    if (d_lo * d_hi > 0.0) {
        p.escape_efficiency = d_lo > 0.0 ? 1.0 : 0.0;
        throw FitUnreachable("v_diff target " + std::to_string(targets.v_diff) + " is not reachable",
                             quadrature_spectra(p, targets.frequency_hz));
    }
    const double eta = bracketed_root(v_diff_at, 0.0, 1.0);
    p.escape_efficiency = eta;

    auto v_sum_at = [&](double e) {
        p.excess_phase_noise = e;
        return quadrature_spectra(p, targets.frequency_hz).v_sum - targets.v_sum;
    };
    const double s0 = v_sum_at(0.0);
    if (s0 > 0.0) {
        p.excess_phase_noise = 0.0;
        throw FitUnreachable("v_sum target " + std::to_string(targets.v_sum) +
                                 " lies below the noise floor without excess noise",
                             quadrature_spectra(p, targets.frequency_hz));
    }
    double hi = 1.0;
    while (v_sum_at(hi) < 0.0) {
        hi *= 2.0;
        if (hi > 1e12) {
            throw FitUnreachable("v_sum target is insensitive to excess noise",
                                 quadrature_spectra(p, targets.frequency_hz));
        }
    }
    const double excess = bracketed_root(v_sum_at, 0.0, hi);
    p.excess_phase_noise = excess;
    p.escape_efficiency = eta;

    FitResult r{p, quadrature_spectra(p, targets.frequency_hz), 0.0, 0.0};
    r.residual_diff = std::abs(r.achieved.v_diff - targets.v_diff);
    r.residual_sum = std::abs(r.achieved.v_sum - targets.v_sum);
    return r;
}

}  // namespace twocolor::nopo

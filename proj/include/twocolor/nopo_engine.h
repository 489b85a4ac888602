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

#ifndef TWOCOLOR_NOPO_ENGINE_H
#define TWOCOLOR_NOPO_ENGINE_H

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "twocolor/gaussian_core.h"
#include "twocolor/time_series.h"

/// Above-threshold non-degenerate OPO with the pump adiabatically eliminated.
///
/// Quadrature fluctuations q = (x_a, p_a, x_b, p_b) around the bright steady
/// state obey dq/dt = kappa (M q + B xi), where kappa is the signal/idler
/// amplitude decay rate, xi = (x_a,in, p_a,in, x_b,in, p_b,in, x_pump,in,
/// p_pump,in) are unit white vacuum inputs, and the output field is
/// q_out = sqrt(2 kappa) q - q_in. Times are in units of 1/kappa and
/// frequencies in Omega = omega / kappa = f / HWHM.
namespace twocolor::nopo {

struct OpoParams {
    double pump_power_mw = 130.0;
    double threshold_power_mw = 120.0;
    double linewidth_fwhm_hz = 91e6;
    /// Common efficiency for both beams (cavity escape and anything shared).
    double escape_efficiency = 1.0;
    /// Per-arm power loss after the source (propagation, detection).
    double extra_loss_a = 0.0;
    double extra_loss_b = 0.0;
    /// Variance added to the sum-quadrature combination before the per-arm
    /// losses.
    double excess_phase_noise = 0.0;

    /// Throws std::invalid_argument; pump below threshold is out of scope.
    void validate() const;
};

using Matrix4 = Eigen::Matrix4d;
using InputMatrix = Eigen::Matrix<double, 4, 6>;

/// sigma = sqrt(P / P_th).
double pump_parameter(double pump_power_mw, double threshold_power_mw);
double pump_parameter(const OpoParams& params);

/// kappa = pi * FWHM in rad/s.
double amplitude_decay_rate(const OpoParams& params);

/// Omega = f / HWHM.
double normalized_frequency(const OpoParams& params, double f_hz);

/// Drift matrix in units of kappa.
Matrix4 drift_matrix(double sigma);
Matrix4 drift_matrix(const OpoParams& params);

/// Coupling of the six vacuum inputs (signal/idler ports, then pump port).
InputMatrix noise_input_matrix(double sigma);

/// Orthogonal change of basis to (x_-, x_+, p_-, p_+), with
/// x_-+ = (x_a -+ x_b) / sqrt(2) and likewise for p.
Matrix4 difference_sum_basis();

/// Unit combinations whose variances are reported as v_diff and v_sum.
Eigen::Vector4d difference_combination();  // (x_a - x_b) / sqrt(2)
Eigen::Vector4d sum_combination();         // (p_a + p_b) / sqrt(2)

struct QuadratureSpectra {
    double omega_norm;
    double v_diff;  // V(X_A - X_B) / 2
    double v_sum;   // V(X_A^perp + X_B^perp) / 2
};

/// Loss-dressed output spectra at sideband frequency f. At f = 0 a
/// combination that couples to the undamped phase-difference mode diverges
/// and is reported as +infinity.
QuadratureSpectra quadrature_spectra(const OpoParams& params, double f_hz);

/// Output spectral density of an arbitrary real combination c^T q_out.
double combination_spectrum(const OpoParams& params, double f_hz, const Eigen::Vector4d& c);

/// Two-mode Gaussian state of the demodulated sideband quadratures at f > 0:
/// the symmetrized output cross-spectral matrix, loss-dressed.
gaussian::GaussianState sideband_state(const OpoParams& params, double f_hz);

// ---------------------------------------------------------------------------
// Time-domain oracle.

/// Linear Langevin system in units of kappa. The first n inputs are the cavity
/// ports, so the output is q_out = sqrt(2) q - xi[0:n] (per unit time).
struct LinearLangevinModel {
    Eigen::MatrixXd drift;        // n x n
    Eigen::MatrixXd noise_input;  // n x m, m >= n
};

LinearLangevinModel opo_langevin_model(double sigma);

/// Receives one output-quadrature sample per step, scaled so that vacuum has
/// unit variance per sample.
using OutputSink = std::function<void(std::span<const double>)>;

/// Euler-Maruyama integration with step h = kappa * dt < 0.05.
void integrate_linear_langevin(const LinearLangevinModel& model, double kappa_dt, std::size_t steps,
                               std::uint64_t seed, const OutputSink& sink);

struct LangevinRecord {
    detection::TimeSeries difference;  // (x_a - x_b)/sqrt(2) output
    detection::TimeSeries sum;         // (p_a + p_b)/sqrt(2) output
};

/// Time-domain counterpart of quadrature_spectra, including the same
/// efficiencies and excess noise, applied sample by sample.
LangevinRecord langevin_oracle(const OpoParams& params, double duration_s, double dt_s, std::uint64_t seed);

struct OracleComparison {
    std::size_t bins = 0;
    double rms_error = 0.0;  // vacuum units, both quadratures pooled
    double rms_error_diff = 0.0;
    double rms_error_sum = 0.0;
    double max_abs_error = 0.0;
};

/// Welch spectra of an oracle record against quadrature_spectra on bins with
/// omega_min <= Omega <= omega_max.
OracleComparison compare_oracle_spectra(const OpoParams& params, const LangevinRecord& record,
                                        std::size_t segment_length, double omega_min, double omega_max);

// ---------------------------------------------------------------------------
// Calibration to measured variances.

struct FitTargets {
    double v_diff = 0.75;
    double v_sum = 0.89;
    double frequency_hz = 63.9e6;
};

struct FitResult {
    OpoParams params;  // escape_efficiency and excess_phase_noise fitted
    QuadratureSpectra achieved;
    double residual_diff;
    double residual_sum;
};

/// Raised when a target lies outside what the free parameters can reach.
class FitUnreachable : public std::runtime_error {
 public:
    FitUnreachable(const std::string& what, QuadratureSpectra extremum)
        : std::runtime_error(what), extremum_(extremum) {}
    /// Spectra at the parameter bound closest to the target.
    const QuadratureSpectra& extremum() const { return extremum_; }

 private:
    QuadratureSpectra extremum_;
};

/// Solves for escape_efficiency in [0, 1] so that v_diff hits its target, then
/// for excess_phase_noise >= 0 so that v_sum does. Other fields of `base`
/// are held fixed.
FitResult fit_to_measurement(const FitTargets& targets, const OpoParams& base);

}  // namespace twocolor::nopo

#endif  // TWOCOLOR_NOPO_ENGINE_H

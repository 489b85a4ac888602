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

#ifndef TWOCOLOR_DETECTION_H
#define TWOCOLOR_DETECTION_H

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "twocolor/time_series.h"

/// Balanced homodyne records, lock-in demodulation and variance estimation.
///
/// All records are in vacuum units: a shot-noise-limited photocurrent has a
/// flat spectral density of 1 (per-sample variance 1 for a white record), and
/// the calibrated demodulator maps that to a baseband record of variance 1.
namespace twocolor::detection {

struct DetectorParams {
    double lo_power_mw = 2.7;
    /// Shot-noise clearance above electronic dark noise. Infinity means no
    /// dark noise.
    double dark_clearance_db = 4.0;
    double demod_freq_hz = 63.9e6;
    double lowpass_cutoff_hz = 50e3;

    /// Throws std::invalid_argument.
    void validate() const;
    /// Same detector on a frequency axis divided by `factor`.
    DetectorParams scaled(double factor) const;
};

/// Dark-noise variance relative to vacuum, 10^(-clearance/10).
double dark_noise_variance(double clearance_db);

/// Efficiency of the pure loss that has the same effect on vacuum-normalized
/// variances as uncorrected dark noise: (v + d) / (1 + d) = eta v + 1 - eta.
double dark_equivalent_efficiency(double clearance_db);

/// Quadrature noise density vs Fourier frequency, phase independent.
using SpectrumFn = std::function<double(double)>;
/// Real symmetric cross-spectral matrix of (x_1, p_1, ..., x_n, p_n).
using CrossSpectrumFn = std::function<Eigen::MatrixXd(double)>;
/// LO phase in radians vs time in seconds.
using PhaseFn = std::function<double(double)>;

struct SynthesisOptions {
    /// Samples per independently synthesized block (a power of two).
    std::size_t block_size = std::size_t{1} << 18;
    /// Only frequencies within this distance of the demodulation frequency
    /// are synthesized; 0 keeps the whole band (DC excluded). A narrow band
    /// is generated as a complex envelope on a coarse grid and upconverted,
    /// which is much cheaper than a full-length transform.
    double band_halfwidth_hz = 0.0;
    /// LO phases are re-evaluated every this many samples (rounded to the
    /// envelope grid in band-limited mode).
    std::size_t phase_stride = 256;
};

/// Time-varying linear combination of synthesized channels: fills an
/// outputs x channels weight matrix for time t.
using MixingFn = std::function<void(double, Eigen::MatrixXd&)>;

/// Stationary multichannel Gaussian noise with a prescribed cross-spectral
/// density, synthesized block by block in the frequency domain.
class GaussianNoiseSynthesizer {
 public:
    /// Frequencies outside [band_lo_hz, band_hi_hz] get no power. When
    /// band_hi_hz - band_lo_hz is at most an eighth of the sample rate the
    /// envelope path is used.
    GaussianNoiseSynthesizer(const CrossSpectrumFn& spectrum, int channels, double sample_rate_hz,
                             std::uint64_t seed, double band_lo_hz, double band_hi_hz, std::size_t block_size);
    ~GaussianNoiseSynthesizer();
    GaussianNoiseSynthesizer(GaussianNoiseSynthesizer&&) noexcept;
    GaussianNoiseSynthesizer& operator=(GaussianNoiseSynthesizer&&) noexcept;

    int channels() const;
    std::size_t block_size() const;
    double sample_rate_hz() const;
    bool band_limited() const;
    /// Start time of the next block.
    double time_s() const;

    /// Fills one block per channel; out is resized to channels x block_size.
    void next_block(std::vector<std::vector<double>>& out);

    /// One block of `outputs` mixtures of the channels, with the weights
    /// re-evaluated every `stride` samples.
    void next_mixed_block(const MixingFn& mix, int outputs, std::size_t stride,
                          std::vector<std::vector<double>>& out);

 private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Photocurrents of one or more homodyne detectors. Arm k reads
/// x_k cos(theta_k(t)) + p_k sin(theta_k(t)) from a 2n-channel process.
class HomodyneSynthesizer {
 public:
    HomodyneSynthesizer(const CrossSpectrumFn& spectrum, std::vector<PhaseFn> phases, double sample_rate_hz,
                        double demod_freq_hz, std::uint64_t seed, const SynthesisOptions& options = {});

    std::size_t arms() const { return phases_.size(); }
    std::size_t block_size() const { return noise_.block_size(); }
    double time_s() const { return noise_.time_s(); }
    void next_block(std::vector<std::vector<double>>& photocurrents);

 private:
    GaussianNoiseSynthesizer noise_;
    std::vector<PhaseFn> phases_;
    std::size_t phase_stride_;
};

/// Single detector record whose spectrum does not depend on the LO phase.
TimeSeries synthesize_bhd(const SpectrumFn& spectrum, const PhaseFn& lo_phase, const DetectorParams& det,
                          double duration_s, double sample_rate_hz, std::uint64_t seed,
                          const SynthesisOptions& options = {});

/// Single detector record from a 2x2 (x, p) cross-spectrum.
TimeSeries synthesize_bhd_quadratures(const CrossSpectrumFn& spectrum, const PhaseFn& lo_phase,
                                      const DetectorParams& det, double duration_s, double sample_rate_hz,
                                      std::uint64_t seed, const SynthesisOptions& options = {});

/// Mixer with sqrt(2) cos(2 pi f t), four cascaded single-pole low-passes
/// with overall -3 dB at the cutoff, and decimation to at least 8x the
/// cutoff. The output is scaled so a unit-density input reads variance 1.
class Demodulator {
 public:
    /// All channels share the mixer; each has its own filter state.
    Demodulator(double sample_rate_hz, double demod_freq_hz, double cutoff_hz, std::size_t channels = 1);

    double output_rate_hz() const { return input_rate_hz_ / static_cast<double>(decimation_); }
    std::size_t decimation() const { return decimation_; }
    /// Low-frequency group delay of the filter.
    double group_delay_s() const;
    /// |H(f)| of the low-pass, normalized to 1 at DC.
    double lowpass_magnitude(double f_hz) const;

    /// Appends decimated output samples for the next input chunk.
    void process(std::span<const double> input, std::vector<double>& output);
    /// Multichannel form; inputs must have equal lengths.
    void process(const std::vector<std::vector<double>>& inputs, std::vector<std::vector<double>>& outputs);

 private:
    void run(const double* const* inputs, std::size_t length, std::vector<double>* const* outputs);

    double input_rate_hz_;
    double demod_freq_hz_;
    double pole_hz_ = 0.0;
    double alpha_ = 0.0;
    std::size_t decimation_ = 1;
    std::size_t countdown_ = 1;
    double output_gain_ = 1.0;
    std::vector<std::array<double, 4>> stages_;
    std::uint64_t sample_index_ = 0;
};

TimeSeries demodulate(const TimeSeries& ts, double demod_freq_hz, double lowpass_cutoff_hz);

/// Adds white Gaussian noise of variance dark_noise_variance(clearance_db).
TimeSeries add_dark_noise(const TimeSeries& ts, double clearance_db, std::uint64_t seed);

struct VarianceEstimate {
    double variance;
    double standard_error;
    std::size_t windows;
};

enum class MeanHandling {
    subtract,    // per-window sample mean removed (n - 1 normalization)
    known_zero,  // mean taken as zero (n normalization)
};

/// Mean of per-window sample variances over non-overlapping windows. With two
/// or more windows the standard error is the spread of window variances over
/// sqrt(windows), which stays honest for correlated samples; a single window
/// falls back to variance * sqrt(2 / (n - 1)).
VarianceEstimate variance_estimate(std::span<const double> samples, std::size_t window_samples,
                                   MeanHandling mean = MeanHandling::subtract);
VarianceEstimate variance_estimate(const TimeSeries& ts, std::size_t window_samples,
                                   MeanHandling mean = MeanHandling::subtract);

/// signal / vacuum, or (signal - dark) / (vacuum - dark) when subtracting.
double normalize_to_vacuum(double signal_variance, double vacuum_variance, double dark_variance, bool subtract_dark);

}  // namespace twocolor::detection

#endif  // TWOCOLOR_DETECTION_H

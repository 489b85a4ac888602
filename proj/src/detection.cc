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

#include "twocolor/detection.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>

#include "fft.h"

namespace twocolor::detection {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_nyquist(double sample_rate_hz, double demod_freq_hz) {
    if (!(sample_rate_hz > 2.5 * demod_freq_hz)) {
        throw std::invalid_argument("sample rate must exceed 2.5x the demodulation frequency");
    }
}

std::size_t sample_count(double duration_s, double sample_rate_hz) {
    if (!(duration_s > 0.0) || !std::isfinite(duration_s)) {
        throw std::invalid_argument("duration must be positive");
    }
    auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
    if (n < 2) {
        throw std::invalid_argument("duration too short for two samples");
    }
    return n;
}

TimeSeries record_single_arm(HomodyneSynthesizer& synth, std::size_t n, double sample_rate_hz) {
    std::vector<double> samples;
    samples.reserve(n);
    std::vector<std::vector<double>> block;
    while (samples.size() < n) {
        synth.next_block(block);
        const std::size_t take = std::min(n - samples.size(), block[0].size());
        samples.insert(samples.end(), block[0].begin(), block[0].begin() + static_cast<std::ptrdiff_t>(take));
    }
    return TimeSeries(sample_rate_hz, std::move(samples), SampleUnit::photocurrent_norm);
}

}  // namespace

void DetectorParams::validate() const {
    if (!(lo_power_mw > 0.0)) {
        throw std::invalid_argument("LO power must be positive");
    }
    if (!(dark_clearance_db >= 0.0)) {
        throw std::invalid_argument("dark-noise clearance must be >= 0 dB");
    }
    if (!(lowpass_cutoff_hz > 0.0) || !std::isfinite(lowpass_cutoff_hz)) {
        throw std::invalid_argument("low-pass cutoff must be positive");
    }
    if (!(demod_freq_hz > 2.0 * lowpass_cutoff_hz) || !std::isfinite(demod_freq_hz)) {
        throw std::invalid_argument("demodulation frequency must exceed twice the low-pass cutoff");
    }
}

DetectorParams DetectorParams::scaled(double factor) const {
    if (!(factor > 0.0) || !std::isfinite(factor)) {
        throw std::invalid_argument("frequency scale factor must be positive");
    }
    DetectorParams out = *this;
    out.demod_freq_hz /= factor;
    out.lowpass_cutoff_hz /= factor;
    return out;
}

double dark_noise_variance(double clearance_db) {
    if (!(clearance_db >= 0.0)) {
        throw std::invalid_argument("dark-noise clearance must be >= 0 dB");
    }
    if (std::isinf(clearance_db)) {
        return 0.0;
    }
    return std::pow(10.0, -clearance_db / 10.0);
}

double dark_equivalent_efficiency(double clearance_db) { return 1.0 / (1.0 + dark_noise_variance(clearance_db)); }

// ---------------------------------------------------------------------------

struct GaussianNoiseSynthesizer::Impl {
    int channels = 0;
    std::size_t n = 0;
    double sample_rate_hz = 0.0;
    std::uint64_t emitted = 0;
    std::size_t first_bin = 0;
    std::size_t last_bin = 0;
    std::vector<double> factors;  // channels x channels per bin, column major
    boost::random::mt19937_64 rng;
    boost::random::normal_distribution<double> normal;

    // Full-band path.
    std::vector<internal::InverseRealFft> real_ffts;
    std::vector<std::vector<double>> scratch;

    // Envelope path: bins around center_bin on a coarse grid of
    // n / envelope_step points, linearly interpolated and upconverted.
    bool band = false;
    std::size_t center_bin = 0;
    std::size_t envelope_step = 0;
    std::vector<internal::InverseComplexFft> envelope_ffts;
    std::vector<double> carrier_re;
    std::vector<double> carrier_im;
    std::vector<double> ramp;  // r / envelope_step
    std::vector<std::vector<std::complex<double>>> mixed;

    template <typename Sink>
    void draw_bins(Sink&& sink) {
        const auto k = static_cast<std::size_t>(channels);
        const double root_n = std::sqrt(static_cast<double>(n));
        const double half = std::sqrt(0.5);
        std::vector<std::complex<double>> z(k);
        for (std::size_t b = first_bin; b <= last_bin; ++b) {
            const bool real_bin = (b == n / 2);
            for (std::size_t c = 0; c < k; ++c) {
                const double re = normal(rng);
                const double im = normal(rng);
                z[c] = real_bin ? std::complex<double>(re, 0.0) : std::complex<double>(half * re, half * im);
            }
            const double* l = factors.data() + (b - first_bin) * k * k;
            for (std::size_t r = 0; r < k; ++r) {
                std::complex<double> acc = 0.0;
                for (std::size_t c = 0; c < k; ++c) {
                    acc += l[c * k + r] * z[c];
                }
                sink(b, r, root_n * acc);
            }
        }
    }

    void full_block() {
        for (auto& f : real_ffts) {
            std::fill(f.input().begin(), f.input().end(), std::complex<double>(0.0, 0.0));
        }
        draw_bins([this](std::size_t b, std::size_t r, std::complex<double> v) { real_ffts[r].input()[b] = v; });
        const double inv_n = 1.0 / static_cast<double>(n);
        scratch.resize(static_cast<std::size_t>(channels));
        for (std::size_t c = 0; c < scratch.size(); ++c) {
            real_ffts[c].execute();
            auto y = real_ffts[c].output();
            scratch[c].resize(n);
            for (std::size_t j = 0; j < n; ++j) {
                scratch[c][j] = y[j] * inv_n;
            }
        }
    }

    void envelope_block() {
        const std::size_t p = n / envelope_step;
        for (auto& f : envelope_ffts) {
            std::fill(f.input().begin(), f.input().end(), std::complex<double>(0.0, 0.0));
        }
        draw_bins([this, p](std::size_t b, std::size_t r, std::complex<double> v) {
            const auto offset = static_cast<std::ptrdiff_t>(b) - static_cast<std::ptrdiff_t>(center_bin);
            const auto slot = static_cast<std::size_t>((offset + static_cast<std::ptrdiff_t>(p)) % static_cast<std::ptrdiff_t>(p));
            envelope_ffts[r].input()[slot] = v;
        });
        for (auto& f : envelope_ffts) {
            f.execute();
        }
    }

    // x[j] = (2/n) Re{carrier[j] * u(j / step)} with linear interpolation.
    void upconvert(const std::vector<std::complex<double>>& u, std::vector<double>& out) const {
        const std::size_t p = u.size();
        const double scale = 2.0 / static_cast<double>(n);
        const std::size_t step = envelope_step;
        out.resize(n);
        for (std::size_t q = 0; q < p; ++q) {
            const double ar = scale * u[q].real();
            const double ai = scale * u[q].imag();
            const double dr = scale * u[(q + 1) % p].real() - ar;
            const double di = scale * u[(q + 1) % p].imag() - ai;
            const double* cr = carrier_re.data() + q * step;
            const double* ci = carrier_im.data() + q * step;
            double* o = out.data() + q * step;
            for (std::size_t r = 0; r < step; ++r) {
                const double t = ramp[r];
                o[r] = cr[r] * (ar + t * dr) - ci[r] * (ai + t * di);
            }
        }
    }
};

GaussianNoiseSynthesizer::GaussianNoiseSynthesizer(const CrossSpectrumFn& spectrum, int channels,
                                                   double sample_rate_hz, std::uint64_t seed, double band_lo_hz,
                                                   double band_hi_hz, std::size_t block_size)
    : impl_(std::make_unique<Impl>()) {
    if (channels < 1) {
        throw std::invalid_argument("synthesizer needs at least one channel");
    }
    if (block_size < 16 || !std::has_single_bit(block_size)) {
        throw std::invalid_argument("block size must be a power of two >= 16");
    }
    if (!(sample_rate_hz > 0.0)) {
        throw std::invalid_argument("sample rate must be positive");
    }
    auto& s = *impl_;
    s.channels = channels;
    s.n = block_size;
    s.sample_rate_hz = sample_rate_hz;
    s.rng.seed(seed);

    const double df = sample_rate_hz / static_cast<double>(block_size);
    const double lo = std::max(band_lo_hz, 0.0);
    const double hi = std::min(band_hi_hz, 0.5 * sample_rate_hz);
    s.first_bin = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(lo / df)));
    s.last_bin = std::min(block_size / 2, static_cast<std::size_t>(std::floor(hi / df)));
    if (s.first_bin > s.last_bin) {
        throw std::invalid_argument("synthesis band contains no frequency bins");
    }

    const auto k2 = static_cast<std::size_t>(channels) * static_cast<std::size_t>(channels);
    s.factors.resize((s.last_bin - s.first_bin + 1) * k2);
    for (std::size_t b = s.first_bin; b <= s.last_bin; ++b) {
        Eigen::MatrixXd m = spectrum(static_cast<double>(b) * df);
        if (m.rows() != channels || m.cols() != channels || !m.allFinite()) {
            throw std::invalid_argument("cross-spectrum has wrong shape or non-finite entries");
        }
        // Symmetric square root tolerates singular (pure) spectra.
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (m + m.transpose()));
        const auto& lam = eig.eigenvalues();
        if (lam.minCoeff() < -1e-9 * std::max(1.0, lam.maxCoeff())) {
            throw std::invalid_argument("cross-spectrum is not positive semidefinite");
        }
        Eigen::MatrixXd root = eig.eigenvectors() * lam.cwiseMax(0.0).cwiseSqrt().asDiagonal();
        std::copy(root.data(), root.data() + k2,
                  s.factors.begin() + static_cast<std::ptrdiff_t>((b - s.first_bin) * k2));
    }

    // Envelope grid oversampled 8x over the occupied band.
    const std::size_t width = s.last_bin - s.first_bin + 1;
    const std::size_t grid = std::max<std::size_t>(16, std::bit_ceil(8 * width));
    s.band = grid * 4 <= block_size && s.last_bin < block_size / 2;
    if (s.band) {
        s.center_bin = (s.first_bin + s.last_bin) / 2;
        s.envelope_step = block_size / grid;
        s.carrier_re.resize(block_size);
        s.carrier_im.resize(block_size);
        for (std::size_t j = 0; j < block_size; ++j) {
            const std::size_t turns = (s.center_bin * j) % block_size;
            const double phase = kTwoPi * static_cast<double>(turns) / static_cast<double>(block_size);
            s.carrier_re[j] = std::cos(phase);
            s.carrier_im[j] = std::sin(phase);
        }
        for (std::size_t r = 0; r < s.envelope_step; ++r) {
            s.ramp.push_back(static_cast<double>(r) / static_cast<double>(s.envelope_step));
        }
        for (int c = 0; c < channels; ++c) {
            s.envelope_ffts.emplace_back(grid);
        }
    } else {
        for (int c = 0; c < channels; ++c) {
            s.real_ffts.emplace_back(block_size);
        }
    }
}

GaussianNoiseSynthesizer::~GaussianNoiseSynthesizer() = default;
GaussianNoiseSynthesizer::GaussianNoiseSynthesizer(GaussianNoiseSynthesizer&&) noexcept = default;
GaussianNoiseSynthesizer& GaussianNoiseSynthesizer::operator=(GaussianNoiseSynthesizer&&) noexcept = default;

int GaussianNoiseSynthesizer::channels() const { return impl_->channels; }
std::size_t GaussianNoiseSynthesizer::block_size() const { return impl_->n; }
double GaussianNoiseSynthesizer::sample_rate_hz() const { return impl_->sample_rate_hz; }
bool GaussianNoiseSynthesizer::band_limited() const { return impl_->band; }
double GaussianNoiseSynthesizer::time_s() const {
    return static_cast<double>(impl_->emitted) / impl_->sample_rate_hz;
}

void GaussianNoiseSynthesizer::next_block(std::vector<std::vector<double>>& out) {
    auto& s = *impl_;
    const auto k = static_cast<std::size_t>(s.channels);
    out.resize(k);
    if (s.band) {
        s.envelope_block();
        std::vector<std::complex<double>> u;
        for (std::size_t c = 0; c < k; ++c) {
            auto y = s.envelope_ffts[c].output();
            u.assign(y.begin(), y.end());
            s.upconvert(u, out[c]);
        }
    } else {
        s.full_block();
        for (std::size_t c = 0; c < k; ++c) {
            out[c] = s.scratch[c];
        }
    }
    s.emitted += s.n;
}

void GaussianNoiseSynthesizer::next_mixed_block(const MixingFn& mix, int outputs, std::size_t stride,
                                                std::vector<std::vector<double>>& out) {
    auto& s = *impl_;
    if (outputs < 1) {
        throw std::invalid_argument("need at least one output");
    }
    const auto k = static_cast<Eigen::Index>(s.channels);
    const auto no = static_cast<std::size_t>(outputs);
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(outputs, k);
    out.resize(no);
    auto weights_at = [&](std::size_t j) {
        mix((static_cast<double>(s.emitted + j)) / s.sample_rate_hz, w);
        if (w.rows() != outputs || w.cols() != k || !w.allFinite()) {
            throw std::domain_error("mixing weights have wrong shape or non-finite entries");
        }
    };

    if (s.band) {
        s.envelope_block();
        const std::size_t p = s.n / s.envelope_step;
        s.mixed.assign(no, std::vector<std::complex<double>>(p));
        // Weights are held over whole envelope cells of about `stride` samples.
        const std::size_t cells = std::max<std::size_t>(1, stride / s.envelope_step);
        for (std::size_t q = 0; q < p; ++q) {
            if (q % cells == 0) {
                weights_at(q * s.envelope_step);
            }
            for (std::size_t o = 0; o < no; ++o) {
                std::complex<double> acc = 0.0;
                for (Eigen::Index c = 0; c < k; ++c) {
                    acc += w(static_cast<Eigen::Index>(o), c) * s.envelope_ffts[static_cast<std::size_t>(c)].output()[q];
                }
                s.mixed[o][q] = acc;
            }
        }
        for (std::size_t o = 0; o < no; ++o) {
            s.upconvert(s.mixed[o], out[o]);
        }
    } else {
        s.full_block();
        stride = std::max<std::size_t>(1, stride);
        for (auto& o : out) {
            o.assign(s.n, 0.0);
        }
        for (std::size_t start = 0; start < s.n; start += stride) {
            weights_at(start);
            const std::size_t stop = std::min(s.n, start + stride);
            for (std::size_t o = 0; o < no; ++o) {
                for (Eigen::Index c = 0; c < k; ++c) {
                    const double wc = w(static_cast<Eigen::Index>(o), c);
                    if (wc == 0.0) {
                        continue;
                    }
                    const auto& ch = s.scratch[static_cast<std::size_t>(c)];
                    for (std::size_t j = start; j < stop; ++j) {
                        out[o][j] += wc * ch[j];
                    }
                }
            }
        }
    }
    s.emitted += s.n;
}

// ---------------------------------------------------------------------------

namespace {

GaussianNoiseSynthesizer make_homodyne_noise(const CrossSpectrumFn& spectrum, std::size_t arms,
                                             double sample_rate_hz, double demod_freq_hz, std::uint64_t seed,
                                             const SynthesisOptions& options) {
    if (arms == 0) {
        throw std::invalid_argument("need at least one homodyne arm");
    }
    check_nyquist(sample_rate_hz, demod_freq_hz);
    double lo = 0.0;
    double hi = 0.5 * sample_rate_hz;
    if (options.band_halfwidth_hz > 0.0) {
        lo = demod_freq_hz - options.band_halfwidth_hz;
        hi = demod_freq_hz + options.band_halfwidth_hz;
    }
    return GaussianNoiseSynthesizer(spectrum, static_cast<int>(2 * arms), sample_rate_hz, seed, lo, hi,
                                    options.block_size);
}

}  // namespace

HomodyneSynthesizer::HomodyneSynthesizer(const CrossSpectrumFn& spectrum, std::vector<PhaseFn> phases,
                                         double sample_rate_hz, double demod_freq_hz, std::uint64_t seed,
                                         const SynthesisOptions& options)
    : noise_(make_homodyne_noise(spectrum, phases.size(), sample_rate_hz, demod_freq_hz, seed, options)),
      phases_(std::move(phases)),
      phase_stride_(std::max<std::size_t>(1, options.phase_stride)) {}

void HomodyneSynthesizer::next_block(std::vector<std::vector<double>>& photocurrents) {
    auto mix = [this](double t, Eigen::MatrixXd& w) {
        w.setZero();
        for (std::size_t arm = 0; arm < phases_.size(); ++arm) {
            const double theta = phases_[arm](t);
            if (!std::isfinite(theta)) {
                throw std::domain_error("LO phase function returned a non-finite value");
            }
            const auto row = static_cast<Eigen::Index>(arm);
            w(row, 2 * row) = std::cos(theta);
            w(row, 2 * row + 1) = std::sin(theta);
        }
    };
    noise_.next_mixed_block(mix, static_cast<int>(phases_.size()), phase_stride_, photocurrents);
}

TimeSeries synthesize_bhd(const SpectrumFn& spectrum, const PhaseFn& lo_phase, const DetectorParams& det,
                          double duration_s, double sample_rate_hz, std::uint64_t seed,
                          const SynthesisOptions& options) {
    auto cross = [&spectrum](double f) -> Eigen::MatrixXd {
        return spectrum(f) * Eigen::MatrixXd::Identity(2, 2);
    };
    return synthesize_bhd_quadratures(cross, lo_phase, det, duration_s, sample_rate_hz, seed, options);
}

TimeSeries synthesize_bhd_quadratures(const CrossSpectrumFn& spectrum, const PhaseFn& lo_phase,
                                      const DetectorParams& det, double duration_s, double sample_rate_hz,
                                      std::uint64_t seed, const SynthesisOptions& options) {
    det.validate();
    const std::size_t n = sample_count(duration_s, sample_rate_hz);
    HomodyneSynthesizer synth(spectrum, {lo_phase}, sample_rate_hz, det.demod_freq_hz, seed, options);
    return record_single_arm(synth, n, sample_rate_hz);
}

// ---------------------------------------------------------------------------

Demodulator::Demodulator(double sample_rate_hz, double demod_freq_hz, double cutoff_hz, std::size_t channels)
    : input_rate_hz_(sample_rate_hz), demod_freq_hz_(demod_freq_hz), stages_(channels) {
    if (channels == 0) {
        throw std::invalid_argument("demodulator needs at least one channel");
    }
    if (!(sample_rate_hz > 0.0) || !(demod_freq_hz > 0.0) || !(cutoff_hz > 0.0)) {
        throw std::invalid_argument("rates and frequencies must be positive");
    }
    if (!(demod_freq_hz < 0.5 * sample_rate_hz)) {
        throw std::invalid_argument("demodulation frequency must be below Nyquist");
    }
    if (!(cutoff_hz < demod_freq_hz)) {
        throw std::invalid_argument("low-pass cutoff must be below the demodulation frequency");
    }
    // Four identical poles give -3 dB overall at fc when each sits at
    // fc / sqrt(2^(1/4) - 1).
    pole_hz_ = cutoff_hz / std::sqrt(std::pow(2.0, 0.25) - 1.0);
    alpha_ = 1.0 - std::exp(-kTwoPi * pole_hz_ / sample_rate_hz);
    decimation_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(sample_rate_hz / (8.0 * cutoff_hz))));
    countdown_ = decimation_;

    // Noise gain sum h^2 of the cascade, from its impulse response.
    std::array<double, 4> y{};
    double energy = 0.0;
    const auto length = static_cast<std::size_t>(std::ceil(80.0 / alpha_));
    for (std::size_t k = 0; k < length; ++k) {
        double in = (k == 0) ? 1.0 : 0.0;
        for (double& stage : y) {
            stage += alpha_ * (in - stage);
            in = stage;
        }
        energy += y[3] * y[3];
    }
    output_gain_ = 1.0 / std::sqrt(energy);
}

double Demodulator::group_delay_s() const { return 4.0 * (1.0 - alpha_) / alpha_ / input_rate_hz_; }

double Demodulator::lowpass_magnitude(double f_hz) const {
    const std::complex<double> e = std::polar(1.0, -kTwoPi * f_hz / input_rate_hz_);
    const double one = std::abs(alpha_ / (1.0 - (1.0 - alpha_) * e));
    return std::pow(one, 4);
}

void Demodulator::process(std::span<const double> input, std::vector<double>& output) {
    if (stages_.size() != 1) {
        throw std::invalid_argument("single-channel process() on a multichannel demodulator");
    }
    const double* in = input.data();
    std::vector<double>* out = &output;
    run(&in, input.size(), &out);
}

void Demodulator::process(const std::vector<std::vector<double>>& inputs, std::vector<std::vector<double>>& outputs) {
    if (inputs.size() != stages_.size()) {
        throw std::invalid_argument("channel count does not match the demodulator");
    }
    const std::size_t len = inputs.empty() ? 0 : inputs[0].size();
    std::vector<const double*> in;
    for (const auto& v : inputs) {
        if (v.size() != len) {
            throw std::invalid_argument("channels must have equal length");
        }
        in.push_back(v.data());
    }
    outputs.resize(inputs.size());
    std::vector<std::vector<double>*> out;
    for (auto& v : outputs) {
        out.push_back(&v);
    }
    run(in.data(), len, out.data());
}

void Demodulator::run(const double* const* inputs, std::size_t length, std::vector<double>* const* outputs) {
    constexpr std::size_t kResync = 4096;
    const double cycles_per_sample = demod_freq_hz_ / input_rate_hz_;
    const double rot_re = std::cos(kTwoPi * cycles_per_sample);
    const double rot_im = std::sin(kTwoPi * cycles_per_sample);
    const double root2 = std::sqrt(2.0);
    const double a = alpha_;
    const double b = 1.0 - alpha_;
    const std::size_t channels = stages_.size();

    double ph_re = 0.0;
    double ph_im = 0.0;
    for (std::size_t j = 0; j < length; ++j) {
        if (j % kResync == 0) {
            const long double cyc = static_cast<long double>(sample_index_) * static_cast<long double>(cycles_per_sample);
            const double frac = static_cast<double>(cyc - std::floor(cyc));
            ph_re = std::cos(kTwoPi * frac);
            ph_im = std::sin(kTwoPi * frac);
        }
        const double mixer = root2 * ph_re;
        const double next_re = ph_re * rot_re - ph_im * rot_im;
        ph_im = ph_re * rot_im + ph_im * rot_re;
        ph_re = next_re;
        for (std::size_t c = 0; c < channels; ++c) {
            auto& y = stages_[c];
            y[0] = b * y[0] + a * (mixer * inputs[c][j]);
            y[1] = b * y[1] + a * y[0];
            y[2] = b * y[2] + a * y[1];
            y[3] = b * y[3] + a * y[2];
        }
        ++sample_index_;
        if (--countdown_ == 0) {
            countdown_ = decimation_;
            for (std::size_t c = 0; c < channels; ++c) {
                outputs[c]->push_back(output_gain_ * stages_[c][3]);
            }
        }
    }
}

TimeSeries demodulate(const TimeSeries& ts, double demod_freq_hz, double lowpass_cutoff_hz) {
    Demodulator demod(ts.sample_rate_hz(), demod_freq_hz, lowpass_cutoff_hz);
    std::vector<double> out;
    out.reserve(ts.size() / demod.decimation() + 1);
    demod.process(ts.samples(), out);
    if (out.size() < 2) {
        throw std::invalid_argument("record too short to demodulate");
    }
    return TimeSeries(demod.output_rate_hz(), std::move(out), SampleUnit::quadrature_norm);
}

TimeSeries add_dark_noise(const TimeSeries& ts, double clearance_db, std::uint64_t seed) {
    const double var = dark_noise_variance(clearance_db);
    std::vector<double> out(ts.samples().begin(), ts.samples().end());
    if (var > 0.0) {
        boost::random::mt19937_64 rng(seed);
        boost::random::normal_distribution<double> normal(0.0, std::sqrt(var));
        for (double& v : out) {
            v += normal(rng);
        }
    }
    return TimeSeries(ts.sample_rate_hz(), std::move(out), ts.unit());
}

VarianceEstimate variance_estimate(std::span<const double> samples, std::size_t window_samples, MeanHandling mean) {
    if (window_samples < 2) {
        throw std::invalid_argument("variance window needs at least two samples");
    }
    const std::size_t windows = samples.size() / window_samples;
    if (windows == 0) {
        throw std::invalid_argument("record shorter than one variance window");
    }
    std::vector<double> per_window(windows);
    const double n = static_cast<double>(window_samples);
    for (std::size_t w = 0; w < windows; ++w) {
        auto chunk = samples.subspan(w * window_samples, window_samples);
        double m = 0.0;
        if (mean == MeanHandling::subtract) {
            for (double v : chunk) {
                m += v;
            }
            m /= n;
        }
        double ss = 0.0;
        for (double v : chunk) {
            ss += (v - m) * (v - m);
        }
        per_window[w] = ss / (mean == MeanHandling::subtract ? n - 1.0 : n);
    }
    double avg = 0.0;
    for (double v : per_window) {
        avg += v;
    }
    avg /= static_cast<double>(windows);

    VarianceEstimate out{avg, 0.0, windows};
    if (windows >= 2) {
        double spread = 0.0;
        for (double v : per_window) {
            spread += (v - avg) * (v - avg);
        }
        spread /= static_cast<double>(windows - 1);
        out.standard_error = std::sqrt(spread / static_cast<double>(windows));
    } else {
        out.standard_error = avg * std::sqrt(2.0 / (n - 1.0));
    }
    return out;
}

VarianceEstimate variance_estimate(const TimeSeries& ts, std::size_t window_samples, MeanHandling mean) {
    return variance_estimate(ts.samples(), window_samples, mean);
}

double normalize_to_vacuum(double signal_variance, double vacuum_variance, double dark_variance, bool subtract_dark) {
    if (!(dark_variance >= 0.0) || !(vacuum_variance > dark_variance)) {
        throw std::invalid_argument("need vacuum variance > dark variance >= 0");
    }
    if (subtract_dark) {
        return (signal_variance - dark_variance) / (vacuum_variance - dark_variance);
    }
    return signal_variance / vacuum_variance;
}

}  // namespace twocolor::detection

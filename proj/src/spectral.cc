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

#include "twocolor/spectral.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fft.h"

namespace twocolor::detection {

PowerSpectrum welch_psd(const TimeSeries& ts, std::size_t segment_length, std::size_t overlap) {
    if (segment_length < 2 || segment_length % 2 != 0) {
        throw std::invalid_argument("Welch segment length must be even and >= 2");
    }
    if (overlap >= segment_length) {
        throw std::invalid_argument("Welch overlap must be shorter than the segment");
    }
    if (ts.size() < segment_length) {
        throw std::invalid_argument("record shorter than one Welch segment");
    }

    const std::size_t step = segment_length - overlap;
    const std::size_t bins = segment_length / 2 + 1;
    std::vector<double> window(segment_length);
    double window_power = 0.0;
    for (std::size_t k = 0; k < segment_length; ++k) {
        // Periodic Hann.
        window[k] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(k) /
                                          static_cast<double>(segment_length)));
        window_power += window[k] * window[k];
    }

    internal::RealFft fft(segment_length);
    PowerSpectrum out;
    out.density.assign(bins, 0.0);
    auto x = ts.samples();
    for (std::size_t start = 0; start + segment_length <= x.size(); start += step) {
        auto in = fft.input();
        for (std::size_t k = 0; k < segment_length; ++k) {
            in[k] = window[k] * x[start + k];
        }
        fft.execute();
        auto spec = fft.output();
        for (std::size_t b = 0; b < bins; ++b) {
            out.density[b] += std::norm(spec[b]);
        }
        ++out.segments;
    }
    double scale = 1.0 / (window_power * static_cast<double>(out.segments));
    out.frequency_hz.resize(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        out.density[b] *= scale;
        out.frequency_hz[b] = static_cast<double>(b) * ts.sample_rate_hz() / static_cast<double>(segment_length);
    }
    return out;
}

}  // namespace twocolor::detection

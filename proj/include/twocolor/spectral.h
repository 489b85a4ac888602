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

#ifndef TWOCOLOR_SPECTRAL_H
#define TWOCOLOR_SPECTRAL_H

#include <cstddef>
#include <vector>

#include "twocolor/time_series.h"

namespace twocolor::detection {

struct PowerSpectrum {
    std::vector<double> frequency_hz;
    /// Density normalized to per-sample variance: white noise of unit
    /// variance reads 1 in every bin.
    std::vector<double> density;
    std::size_t segments = 0;
};

/// Welch estimate with a Hann window and the given segment overlap.
/// Bins run from DC to Nyquist.
PowerSpectrum welch_psd(const TimeSeries& ts, std::size_t segment_length, std::size_t overlap);

}  // namespace twocolor::detection

#endif  // TWOCOLOR_SPECTRAL_H

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

#ifndef TWOCOLOR_TIME_SERIES_H
#define TWOCOLOR_TIME_SERIES_H

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace twocolor::detection {

enum class SampleUnit : std::uint32_t {
    photocurrent_norm = 0,
    quadrature_norm = 1,
};

/// Uniformly sampled real record. Samples are in vacuum units: a vacuum
/// record has unit variance per sample.
class TimeSeries {
 public:
    TimeSeries(double sample_rate_hz, std::vector<double> samples, SampleUnit unit);

    double sample_rate_hz() const { return sample_rate_hz_; }
    double duration_s() const { return static_cast<double>(samples_.size()) / sample_rate_hz_; }
    std::size_t size() const { return samples_.size(); }
    std::span<const double> samples() const { return samples_; }
    SampleUnit unit() const { return unit_; }

 private:
    double sample_rate_hz_;
    std::vector<double> samples_;
    SampleUnit unit_;
};

// Binary layout, little endian:
//   0  char[4] "TCTS"
//   4  u32     format version (1)
//   8  f64     sample rate in Hz
//   16 u64     sample count
//   24 u32     unit
//   28 u32     reserved (0)
//   32 f64[n]  samples
inline constexpr std::uint32_t kTimeSeriesFormatVersion = 1;
inline constexpr std::size_t kTimeSeriesHeaderBytes = 32;

void write_binary(const TimeSeries& ts, const std::filesystem::path& path);
TimeSeries read_binary(const std::filesystem::path& path);

/// Two columns (time_s, value) behind a versioned comment line.
void write_csv(const TimeSeries& ts, const std::filesystem::path& path);

}  // namespace twocolor::detection

#endif  // TWOCOLOR_TIME_SERIES_H

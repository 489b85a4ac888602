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

#include "twocolor/time_series.h"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <stdexcept>
#include <string>

namespace twocolor::detection {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
void put_le(std::array<char, sizeof(T)>& out, T value) {
    std::memcpy(out.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(out.begin(), out.end());
    }
}

template <typename T>
T get_le(const char* in) {
    std::array<char, sizeof(T)> buf;
    std::memcpy(buf.data(), in, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(buf.begin(), buf.end());
    }
    T value;
    std::memcpy(&value, buf.data(), sizeof(T));
    return value;
}

template <typename T>
void write_le(std::ostream& os, T value) {
    std::array<char, sizeof(T)> buf;
    put_le(buf, value);
    os.write(buf.data(), buf.size());
}

}  // namespace

TimeSeries::TimeSeries(double sample_rate_hz, std::vector<double> samples, SampleUnit unit)
    : sample_rate_hz_(sample_rate_hz), samples_(std::move(samples)), unit_(unit) {
    if (!(sample_rate_hz_ > 0.0) || !std::isfinite(sample_rate_hz_)) {
        throw std::invalid_argument("sample rate must be positive and finite");
    }
    if (samples_.size() < 2) {
        throw std::invalid_argument("time series needs at least two samples");
    }
    if (!std::all_of(samples_.begin(), samples_.end(), [](double v) { return std::isfinite(v); })) {
        throw std::invalid_argument("time series contains non-finite samples");
    }
    if (unit_ != SampleUnit::photocurrent_norm && unit_ != SampleUnit::quadrature_norm) {
        throw std::invalid_argument("unknown sample unit");
    }
}

void write_binary(const TimeSeries& ts, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    os.write("TCTS", 4);
    write_le<std::uint32_t>(os, kTimeSeriesFormatVersion);
    write_le<double>(os, ts.sample_rate_hz());
    write_le<std::uint64_t>(os, ts.size());
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(ts.unit()));
    write_le<std::uint32_t>(os, 0);
    for (double v : ts.samples()) {
        write_le<double>(os, v);
    }
    if (!os) {
        throw std::runtime_error("write failed for " + path.string());
    }
}

TimeSeries read_binary(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::array<char, kTimeSeriesHeaderBytes> header;
    if (!is.read(header.data(), header.size())) {
        throw std::runtime_error(path.string() + ": truncated header");
    }
    if (std::memcmp(header.data(), "TCTS", 4) != 0) {
        throw std::runtime_error(path.string() + ": bad magic");
    }
    auto version = get_le<std::uint32_t>(header.data() + 4);
    if (version != kTimeSeriesFormatVersion) {
        throw std::runtime_error(path.string() + ": unsupported version " + std::to_string(version));
    }
    double rate = get_le<double>(header.data() + 8);
    auto n = get_le<std::uint64_t>(header.data() + 16);
    auto unit = get_le<std::uint32_t>(header.data() + 24);

    std::vector<double> samples(n);
    std::vector<char> raw(n * sizeof(double));
    if (!is.read(raw.data(), static_cast<std::streamsize>(raw.size()))) {
        throw std::runtime_error(path.string() + ": truncated sample block");
    }
    for (std::uint64_t k = 0; k < n; ++k) {
        samples[k] = get_le<double>(raw.data() + k * sizeof(double));
    }
    return TimeSeries(rate, std::move(samples), static_cast<SampleUnit>(unit));
}

void write_csv(const TimeSeries& ts, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    os << "# twocolor-csv v1 timeseries unit="
       << (ts.unit() == SampleUnit::quadrature_norm ? "quadrature_norm" : "photocurrent_norm") << "\n";
    os << "time_s,value\n";
    os << std::setprecision(17);
    auto s = ts.samples();
    for (std::size_t k = 0; k < s.size(); ++k) {
        os << static_cast<double>(k) / ts.sample_rate_hz() << ',' << s[k] << '\n';
    }
}

}  // namespace twocolor::detection

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

#ifndef TWOCOLOR_RUNNER_REPORT_H
#define TWOCOLOR_RUNNER_REPORT_H

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "twocolor/runner/config.h"

namespace twocolor::runner {

/// Shortest round-trip-safe rendering used in reports and CSV files.
std::string format_number(double v);

/// Text report of `key = value [tag]` lines. The header lists the scenario
/// and every default the experiment does not pin down.
class Report {
 public:
    Report(std::string scenario, const ExperimentConfig& config);

    void add(const std::string& key, double value, Provenance source);
    void add(const std::string& key, const std::string& value, Provenance source);
    void note(const std::string& line);
    /// Copies every config entry as `config.<key> = value [tag]`.
    void add_config(const ExperimentConfig& config);

    const std::string& scenario() const { return scenario_; }
    /// Value of a previously added key, for tests and summaries.
    const std::string& value(const std::string& key) const;
    std::string str() const;
    void write(const std::filesystem::path& path) const;

 private:
    std::string scenario_;
    std::vector<std::string> header_;
    std::vector<std::pair<std::string, std::string>> values_;
    std::vector<std::string> lines_;
};

/// CSV with a versioned schema comment as the first line:
///   # twocolor-csv v1 schema=<name> columns=<c1>,<c2>,...
class CsvWriter {
 public:
    CsvWriter(const std::filesystem::path& path, const std::string& schema, std::vector<std::string> columns);

    void row(std::initializer_list<double> values);
    void row(std::span<const double> values);

 private:
    std::ofstream out_;
    std::size_t columns_;
};

}  // namespace twocolor::runner

#endif  // TWOCOLOR_RUNNER_REPORT_H

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

#include "twocolor/runner/report.h"

#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace twocolor::runner {

namespace {

std::string render(const Value& v) {
    if (const auto* d = std::get_if<double>(&v)) {
        return format_number(*d);
    }
    if (const auto* b = std::get_if<bool>(&v)) {
        return *b ? "true" : "false";
    }
    if (const auto* s = std::get_if<std::string>(&v)) {
        return *s;
    }
    std::string out = "[";
    const auto& seeds = std::get<std::vector<std::uint64_t>>(v);
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        out += (i ? ", " : "") + std::to_string(seeds[i]);
    }
    return out + "]";
}

}  // namespace

std::string format_number(double v) { return fmt::format("{:.10g}", v); }

Report::Report(std::string scenario, const ExperimentConfig& config) : scenario_(std::move(scenario)) {
    header_.push_back("# twocolor report v1");
    header_.push_back("scenario = " + scenario_);
    header_.push_back("# defaults not fixed by the experiment (assumptions, tagged paper-default below):");
    for (const auto& key : config.assumed_keys()) {
        header_.push_back("#   " + key + " = " + render(config.entries().at(key).value));
    }
}

void Report::add(const std::string& key, double value, Provenance source) {
    add(key, format_number(value), source);
}

void Report::add(const std::string& key, const std::string& value, Provenance source) {
    values_.emplace_back(key, value);
    lines_.push_back(key + " = " + value + " [" + provenance_tag(source) + "]");
}

void Report::note(const std::string& line) { lines_.push_back("# " + line); }

void Report::add_config(const ExperimentConfig& config) {
    for (const auto& [key, entry] : config.entries()) {
        add("config." + key, render(entry.value), entry.source);
    }
}

const std::string& Report::value(const std::string& key) const {
    for (const auto& [k, v] : values_) {
        if (k == key) {
            return v;
        }
    }
    throw std::out_of_range("report has no key " + key);
}

std::string Report::str() const {
    std::ostringstream os;
    for (const auto& h : header_) {
        os << h << '\n';
    }
    for (const auto& l : lines_) {
        os << l << '\n';
    }
    return os.str();
}

void Report::write(const std::filesystem::path& path) const {
    std::ofstream os(path);
    if (!os) {
        throw std::runtime_error("cannot write " + path.string());
    }
    os << str();
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::string& schema, std::vector<std::string> columns)
    : out_(path), columns_(columns.size()) {
    if (!out_) {
        throw std::runtime_error("cannot write " + path.string());
    }
    std::string joined;
    for (std::size_t i = 0; i < columns.size(); ++i) {
        joined += (i ? "," : "") + columns[i];
    }
    out_ << "# twocolor-csv v1 schema=" << schema << " columns=" << joined << '\n' << joined << '\n';
}

void CsvWriter::row(std::initializer_list<double> values) { row(std::span<const double>(values.begin(), values.size())); }

void CsvWriter::row(std::span<const double> values) {
    if (values.size() != columns_) {
        throw std::invalid_argument("CSV row has the wrong number of columns");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        out_ << (i ? "," : "") << format_number(values[i]);
    }
    out_ << '\n';
}

}  // namespace twocolor::runner

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

#ifndef TWOCOLOR_RUNNER_CONFIG_H
#define TWOCOLOR_RUNNER_CONFIG_H

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "twocolor/detection.h"
#include "twocolor/nopo_engine.h"
#include "twocolor/optics_chain.h"

namespace twocolor::runner {

/// Where a number came from. Published values and values the experiment
/// leaves open both ship as defaults; the latter are listed separately.
enum class Provenance { paper_default, assumed_default, user_override, fitted, derived };

/// Report tag: paper-default | user-override | fitted | derived.
std::string provenance_tag(Provenance p);

using Value = std::variant<double, bool, std::string, std::vector<std::uint64_t>>;

struct Entry {
    Value value;
    Provenance source;
};

/// Raised for unreadable files, unknown keys, wrong types and values that
/// fail validation. The message carries file, line and field.
class ConfigError : public std::runtime_error {
 public:
    using std::runtime_error::runtime_error;
};

struct CavityConfig {
    std::string name;
    optics::CavityParams params;
    optics::ModulationParams modulation;
    bool filter = false;
    double carrier_power_w = 0.0;  // filter cavities only
};

/// Flat key -> value view of the experiment (keys like "opo.pump_power_mw")
/// plus typed builders for the modules.
class ExperimentConfig {
 public:
    /// The shipped default profile.
    ExperimentConfig();

    const std::map<std::string, Entry>& entries() const { return entries_; }
    double number(const std::string& key) const;
    bool flag(const std::string& key) const;
    const std::string& text(const std::string& key) const;
    const std::vector<std::uint64_t>& seeds() const;
    /// True if the key holds the string "fit".
    bool is_fit(const std::string& key) const;
    Provenance source(const std::string& key) const;

    /// Replaces a value, keeping the stored type. Throws ConfigError on an
    /// unknown key or a type mismatch.
    void set(const std::string& key, Value value, Provenance source = Provenance::user_override);

    /// Keys still at defaults that the experiment does not pin down.
    std::vector<std::string> assumed_keys() const;

    /// OPO parameters with the given efficiency and excess noise (used for
    /// fitted or user-provided values); extra losses exclude dark noise.
    nopo::OpoParams opo_params(double escape_efficiency, double excess_phase_noise) const;
    double linewidth_fwhm_hz() const;
    nopo::FitTargets fit_targets() const;

    /// Detector in physical (unscaled) units.
    detection::DetectorParams detector(const std::string& arm) const;
    std::vector<CavityConfig> cavities() const;
    std::filesystem::path output_directory() const;

    /// Throws ConfigError naming the offending field.
    void validate() const;

 private:
    std::map<std::string, Entry> entries_;
};

/// Parses a YAML file over the defaults. An empty file yields the default
/// profile.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig load_config_text(const std::string& text, const std::string& origin = "<config>");

}  // namespace twocolor::runner

#endif  // TWOCOLOR_RUNNER_CONFIG_H

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

// twocolor <scenario> [--config path] [--out dir] [--seed n] [--scale k]
//                     [--subtract-dark] [--dump-timeseries]

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "twocolor/runner/config.h"
#include "twocolor/runner/scenarios.h"

namespace tr = twocolor::runner;

int main(int argc, char** argv) {
    CLI::App app{"Two-color entanglement digital twin"};
    std::string scenario;
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<double> scale;
    bool subtract_dark = false;
    bool dump_timeseries = false;

    std::string names;
    for (const auto& n : tr::scenario_names()) {
        names += (names.empty() ? "" : ", ") + n;
    }
    app.add_option("scenario", scenario, "One of: " + names)->required();
    app.add_option("--config", config_path, "YAML experiment config");
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--seed", seed, "Run seed (replaces the seed list)");
    app.add_option("--scale", scale, "Frequency scale factor for time-domain synthesis");
    app.add_flag("--subtract-dark", subtract_dark, "Subtract detector dark noise before normalizing");
    app.add_flag("--dump-timeseries", dump_timeseries, "Write demodulated records in binary form");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : tr::kExitConfig;
    }

    tr::ExperimentConfig config;
    try {
        if (!config_path.empty()) {
            config = tr::load_config(config_path);
        }
        if (!out_dir.empty()) {
            config.set("output.directory", out_dir);
        }
        if (seed) {
            config.set("synthesis.seeds", std::vector<std::uint64_t>{*seed});
        }
        if (scale) {
            config.set("synthesis.scale", *scale);
        }
        if (subtract_dark) {
            config.set("synthesis.subtract_dark", true);
        }
        if (dump_timeseries) {
            config.set("output.dump_timeseries", true);
        }
        config.validate();
    } catch (const tr::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return tr::kExitConfig;
    }

    const auto outcome = tr::run_scenario(scenario, config, std::cerr);
    if (outcome.exit_code != tr::kExitOk) {
        std::cerr << scenario << ": " << outcome.message << '\n';
    }
    if (!outcome.directory.empty() && outcome.exit_code != tr::kExitConfig) {
        std::cout << (outcome.directory / "report.txt").string() << '\n';
    }
    return outcome.exit_code;
}

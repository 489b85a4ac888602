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

#ifndef TWOCOLOR_RUNNER_SCENARIOS_H
#define TWOCOLOR_RUNNER_SCENARIOS_H

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "twocolor/detection.h"
#include "twocolor/metrics.h"
#include "twocolor/nopo_engine.h"
#include "twocolor/runner/config.h"
#include "twocolor/runner/report.h"

namespace twocolor::runner {

enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitFitUnreachable = 3,
    kExitNumerical = 4,
};

const std::vector<std::string>& scenario_names();

/// Independent stream for one purpose, derived from a run seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// The OPO as it reaches the detectors: `optical` leaves dark noise out
/// (dark noise is added after demodulation), `measured` folds each arm's
/// dark-equivalent efficiency into its extra loss. The published variances
/// were not corrected for dark noise, so the fit runs on `measured`.
struct SourceModel {
    nopo::OpoParams optical;
    nopo::OpoParams measured;
    bool fitted = false;
    nopo::QuadratureSpectra at_target{};
    metrics::InseparabilityResult result{};
};

/// Throws nopo::FitUnreachable.
SourceModel resolve_source(const ExperimentConfig& config);

struct Figure2Panel {
    std::string name;
    double bob_angle = 0.0;
    metrics::HarmonicFit combined;  // V(X_A - X_B) / 2 vs Alice's angle
    metrics::HarmonicFit alice;     // V(X_A) vs Alice's angle
    metrics::HarmonicFit bob;       // V(X_B) vs Alice's angle
    double minimum = 0.0;
    /// Fit error with the vacuum calibration error folded in.
    double standard_error = 0.0;
    double analytic_minimum = 0.0;
    double analytic_angle = 0.0;
    std::size_t windows = 0;
    /// Alice trace has no first harmonic within 3 standard errors.
    bool alice_pi_periodic = false;
};

struct Figure2Result {
    std::array<Figure2Panel, 2> panels;
    detection::VarianceEstimate vacuum_a{};
    detection::VarianceEstimate vacuum_b{};
    double dark_a = 0.0;
    double dark_b = 0.0;
    metrics::InseparabilityResult result{};
    double result_standard_error = 0.0;
    SourceModel source;
};

/// Full time-domain reproduction. Writes CSV traces (and binary records if
/// output.dump_timeseries is set) when out_dir is non-empty.
Figure2Result compute_figure2(const ExperimentConfig& config, const std::filesystem::path& out_dir = {},
                              std::ostream* log = nullptr);

struct MonteCarloResult {
    nopo::OpoParams params;
    std::vector<nopo::OracleComparison> per_seed;
    /// Welch spectra averaged over seeds, compared with the analytic ones.
    nopo::OracleComparison averaged;
    std::vector<double> omega;
    std::vector<double> welch_diff;
    std::vector<double> welch_sum;
};

MonteCarloResult compute_montecarlo(const ExperimentConfig& config, const nopo::OpoParams& params);

struct ScenarioOutcome {
    int exit_code = kExitOk;
    std::string message;
    std::filesystem::path directory;
};

/// Runs one scenario, writing report.txt and CSV files to
/// <output.directory>/<name>/. Errors become exit codes; the report is still
/// written when a fit target is unreachable.
ScenarioOutcome run_scenario(const std::string& name, const ExperimentConfig& config, std::ostream& log);

}  // namespace twocolor::runner

#endif  // TWOCOLOR_RUNNER_SCENARIOS_H

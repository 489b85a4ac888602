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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "twocolor/runner/config.h"
#include "twocolor/runner/report.h"
#include "twocolor/runner/scenarios.h"

namespace twocolor::runner {
namespace {

namespace fs = std::filesystem;

std::string config_error(const std::string& text) {
    try {
        load_config_text(text, "test.yaml");
    } catch (const ConfigError& err) {
        return err.what();
    }
    return "";
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class TempDir : public ::testing::Test {
 protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("twocolor_runner_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    ExperimentConfig config_in_dir(const std::string& extra = "") const {
        auto cfg = load_config_text(extra);
        cfg.set("output.directory", dir_.string());
        return cfg;
    }

    fs::path dir_;
};

TEST(Config, EmptyYieldsDefaults) {
    const auto cfg = load_config_text("");
    EXPECT_EQ(cfg.number("opo.pump_power_mw"), 130.0);
    EXPECT_EQ(cfg.number("opo.threshold_power_mw"), 120.0);
    EXPECT_TRUE(cfg.is_fit("opo.escape_efficiency"));
    EXPECT_EQ(cfg.text("opo.linewidth_convention"), "fwhm");
    EXPECT_EQ(cfg.source("opo.pump_power_mw"), Provenance::paper_default);
    EXPECT_EQ(cfg.seeds().size(), 1u);
    const auto assumed = cfg.assumed_keys();
    EXPECT_NE(std::find(assumed.begin(), assumed.end(), "opo.linewidth_convention"), assumed.end());
    EXPECT_EQ(std::find(assumed.begin(), assumed.end(), "opo.pump_power_mw"), assumed.end());
    EXPECT_EQ(cfg.cavities().size(), 4u);
    EXPECT_DOUBLE_EQ(cfg.detector("b").lo_power_mw, 1.4);
}

TEST(Config, LinewidthConvention) {
    EXPECT_DOUBLE_EQ(load_config_text("").linewidth_fwhm_hz(), 91e6);
    EXPECT_DOUBLE_EQ(load_config_text("opo:\n  linewidth_convention: hwhm\n").linewidth_fwhm_hz(), 182e6);
    EXPECT_NE(config_error("opo:\n  linewidth_convention: sigma\n").find("linewidth_convention"), std::string::npos);
}

TEST(Config, ThresholdAcceptedBelowRejected) {
    const auto cfg = load_config_text("opo:\n  pump_power_mw: 120\n");
    EXPECT_EQ(cfg.source("opo.pump_power_mw"), Provenance::user_override);
    const auto src = resolve_source(cfg);
    EXPECT_DOUBLE_EQ(nopo::pump_parameter(src.optical), 1.0);
    EXPECT_NEAR(src.at_target.v_diff, 0.75, 1e-9);

    const auto msg = config_error("opo:\n  pump_power_mw: 100\n");
    EXPECT_NE(msg.find("test.yaml:2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("opo.pump_power_mw"), std::string::npos) << msg;
    EXPECT_NE(msg.find("above-threshold"), std::string::npos) << msg;
}

TEST(Config, UnknownKeyAndTypeErrors) {
    auto msg = config_error("opo:\n  pump_power_mw: 130\n  pumpp: 3\n");
    EXPECT_NE(msg.find("test.yaml:3:"), std::string::npos) << msg;
    EXPECT_NE(msg.find("unknown field 'opo.pumpp'"), std::string::npos) << msg;
    msg = config_error("opo:\n  pump_power_mw: lots\n");
    EXPECT_NE(msg.find("test.yaml:2:"), std::string::npos) << msg;
    EXPECT_NE(msg.find("expects a number"), std::string::npos) << msg;
    msg = config_error("output:\n  dump_timeseries: maybe\n");
    EXPECT_NE(msg.find("expects a boolean"), std::string::npos) << msg;
    EXPECT_NE(config_error("- 1\n- 2\n").find("mapping"), std::string::npos);
    EXPECT_NE(config_error("opo: [\n").find("test.yaml:"), std::string::npos);
    EXPECT_THROW(load_config("/nonexistent/twocolor.yaml"), ConfigError);
}

TEST(Config, BothOrNeitherFitted) {
    const auto msg = config_error("opo:\n  escape_efficiency: 0.5\n");
    EXPECT_NE(msg.find("both"), std::string::npos) << msg;
    const auto cfg = load_config_text("opo:\n  escape_efficiency: 0.5\n  excess_phase_noise: 0.1\n");
    const auto src = resolve_source(cfg);
    EXPECT_FALSE(src.fitted);
    EXPECT_DOUBLE_EQ(src.optical.escape_efficiency, 0.5);
    EXPECT_NE(config_error("opo:\n  escape_efficiency: maybe\n  excess_phase_noise: 0.1\n"), "");
}

TEST(Config, DetectorConstraints) {
    EXPECT_NE(config_error("detectors:\n  b:\n    demod_freq_hz: 60e6\n").find("same frequency"), std::string::npos);
    EXPECT_NE(config_error("detectors:\n  b:\n    lowpass_cutoff_hz: 40e3\n").find("low-pass"), std::string::npos);
    EXPECT_NE(config_error("synthesis:\n  sample_rate_hz: 100e3\n").find("sample_rate_hz"), std::string::npos);
    EXPECT_NE(config_error("montecarlo:\n  kappa_dt: 0.08\n").find("kappa_dt"), std::string::npos);
    EXPECT_NE(config_error("synthesis:\n  seeds: []\n").find("seeds"), std::string::npos);
}

TEST(Config, SetKeepsTypes) {
    ExperimentConfig cfg;
    cfg.set("synthesis.scale", 500.0);
    EXPECT_EQ(cfg.number("synthesis.scale"), 500.0);
    EXPECT_EQ(cfg.source("synthesis.scale"), Provenance::user_override);
    EXPECT_THROW(cfg.set("synthesis.scale", std::string("big")), ConfigError);
    EXPECT_THROW(cfg.set("synthesis.nope", 1.0), ConfigError);
    EXPECT_THROW(cfg.number("output.directory"), ConfigError);
}

TEST(Report, TagsAndHeader) {
    const ExperimentConfig cfg;
    Report r("fit", cfg);
    r.add("x", 0.1, Provenance::fitted);
    r.add("y", std::string("yes"), Provenance::user_override);
    r.add("z", 1.0 / 3.0, Provenance::assumed_default);
    const auto text = r.str();
    EXPECT_EQ(text.rfind("# twocolor report v1\n", 0), 0u);
    EXPECT_NE(text.find("scenario = fit"), std::string::npos);
    EXPECT_NE(text.find("#   opo.linewidth_convention = fwhm"), std::string::npos);
    EXPECT_NE(text.find("x = 0.1 [fitted]"), std::string::npos);
    EXPECT_NE(text.find("y = yes [user-override]"), std::string::npos);
    EXPECT_NE(text.find("z = 0.3333333333 [paper-default]"), std::string::npos);
    EXPECT_EQ(r.value("x"), "0.1");
    EXPECT_EQ(provenance_tag(Provenance::derived), "derived");
    EXPECT_EQ(format_number(63.9e6), "63900000");
}

TEST_F(TempDir, CsvHeader) {
    {
        CsvWriter w(dir_ / "a.csv", "demo", {"u", "v"});
        w.row({1.0, 2.5});
        EXPECT_THROW(w.row({1.0}), std::invalid_argument);
    }
    EXPECT_EQ(slurp(dir_ / "a.csv"), "# twocolor-csv v1 schema=demo columns=u,v\nu,v\n1,2.5\n");
}

TEST_F(TempDir, CavitiesScenario) {
    std::ostringstream log;
    const auto out = run_scenario("cavities", config_in_dir(), log);
    ASSERT_EQ(out.exit_code, kExitOk) << out.message;
    const auto report = slurp(out.directory / "report.txt");
    EXPECT_NE(report.find("scenario = cavities"), std::string::npos);
    EXPECT_NE(report.find("2700000"), std::string::npos);
    for (const char* name : {"mc1.csv", "mc2.csv", "fmc_a.csv", "fmc_b.csv"}) {
        EXPECT_TRUE(fs::exists(out.directory / name)) << name;
    }
    EXPECT_EQ(slurp(out.directory / "mc1.csv").rfind("# twocolor-csv v1 schema=cavity", 0), 0u);
}

TEST_F(TempDir, SpectraAndFitReproducible) {
    std::ostringstream log;
    auto cfg = config_in_dir();
    ASSERT_EQ(run_scenario("spectra", cfg, log).exit_code, kExitOk);
    const auto first = slurp(dir_ / "spectra" / "spectra.csv");
    ASSERT_EQ(run_scenario("spectra", cfg, log).exit_code, kExitOk);
    EXPECT_EQ(first, slurp(dir_ / "spectra" / "spectra.csv"));

    const auto fit = run_scenario("fit", cfg, log);
    ASSERT_EQ(fit.exit_code, kExitOk) << fit.message;
    const auto report = slurp(fit.directory / "report.txt");
    EXPECT_NE(report.find("result.I = 0.82"), std::string::npos) << report;
    EXPECT_NE(report.find("[fitted]"), std::string::npos);
}

TEST_F(TempDir, ExitCodes) {
    std::ostringstream log;
    auto cfg = config_in_dir();
    EXPECT_EQ(run_scenario("nonsense", cfg, log).exit_code, kExitConfig);

    cfg.set("targets.v_diff", 0.1);
    const auto unreachable = run_scenario("fit", cfg, log);
    EXPECT_EQ(unreachable.exit_code, kExitFitUnreachable);
    const auto report = slurp(unreachable.directory / "report.txt");
    EXPECT_NE(report.find("fit unreachable"), std::string::npos);
    EXPECT_NE(report.find("extremum.v_diff_half"), std::string::npos);

    auto bad = config_in_dir();
    bad.set("opo.pump_power_mw", 50.0);
    EXPECT_EQ(run_scenario("spectra", bad, log).exit_code, kExitConfig);
}

TEST(Seeds, DerivedStreamsDiffer) {
    EXPECT_EQ(derive_seed(1, 2), derive_seed(1, 2));
    EXPECT_NE(derive_seed(1, 2), derive_seed(1, 3));
    EXPECT_NE(derive_seed(1, 2), derive_seed(2, 2));
}

TEST_F(TempDir, ShortFigure2) {
    auto cfg = config_in_dir();
    cfg.set("synthesis.panel_duration_s", 200.0);
    cfg.set("synthesis.vacuum_duration_s", 100.0);
    const auto res = compute_figure2(cfg, dir_);
    for (const auto& p : res.panels) {
        EXPECT_GT(p.windows, 500u);
        EXPECT_NEAR(p.minimum, p.analytic_minimum, 5.0 * p.standard_error) << p.name;
        EXPECT_LT(p.standard_error, 0.05);
    }
    EXPECT_NEAR(res.vacuum_a.variance, 1.0 + res.dark_a, 5.0 * res.vacuum_a.standard_error);
    EXPECT_TRUE(fs::exists(dir_ / "figure2_X.csv"));
    EXPECT_TRUE(fs::exists(dir_ / "figure2_Xperp_model.csv"));
}

}  // namespace
}  // namespace twocolor::runner

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

#include "twocolor/runner/config.h"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

namespace twocolor::runner {

namespace {

using P = Provenance;

// Thrown by validate(); load_config() attaches the source line.
class FieldError : public ConfigError {
 public:
    FieldError(std::string key, const std::string& message)
        : ConfigError(key + ": " + message), key_(std::move(key)) {}
    const std::string& key() const { return key_; }

 private:
    std::string key_;
};

[[noreturn]] void fail(const std::string& key, const std::string& message) { throw FieldError(key, message); }

const std::set<std::string>& fit_capable() {
    static const std::set<std::string> keys{"opo.escape_efficiency", "opo.excess_phase_noise"};
    return keys;
}

void add_cavity(std::map<std::string, Entry>& e, const std::string& name, double finesse, Provenance finesse_src,
                double fsr, Provenance fsr_src, const std::string& geometry, Provenance geometry_src,
                double mod_hz, bool filter, double carrier_mw) {
    const std::string p = "cavities." + name + ".";
    e[p + "finesse"] = {finesse, finesse_src};
    e[p + "fsr_hz"] = {fsr, fsr_src};
    e[p + "geometry"] = {geometry, geometry_src};
    e[p + "coupling"] = {std::string("impedance_matched"), P::assumed_default};
    e[p + "round_trip_loss"] = {0.0, P::assumed_default};
    e[p + "r1"] = {0.0, P::assumed_default};
    e[p + "r2"] = {0.0, P::assumed_default};
    e[p + "modulation_hz"] = {mod_hz, P::paper_default};
    e[p + "modulation_depth"] = {0.1, P::assumed_default};
    e[p + "filter"] = {filter, P::paper_default};
    if (filter) {
        e[p + "carrier_power_mw"] = {carrier_mw, P::assumed_default};
        e[p + "peak_transmission"] = {0.9, P::assumed_default};
    }
}

void add_detector(std::map<std::string, Entry>& e, const std::string& arm, double wavelength_nm, double lo_mw,
                  double clearance_db) {
    const std::string p = "detectors." + arm + ".";
    e[p + "wavelength_nm"] = {wavelength_nm, P::paper_default};
    e[p + "lo_power_mw"] = {lo_mw, P::paper_default};
    e[p + "dark_clearance_db"] = {clearance_db, P::paper_default};
    e[p + "demod_freq_hz"] = {63.9e6, P::paper_default};
    e[p + "lowpass_cutoff_hz"] = {50e3, P::paper_default};
}

optics::Geometry parse_geometry(const std::string& key, const std::string& v) {
    if (v == "ring") {
        return optics::Geometry::ring;
    }
    if (v == "linear") {
        return optics::Geometry::linear;
    }
    fail(key, "expected 'ring' or 'linear', got '" + v + "'");
}

std::string describe(const Value& v) {
    if (std::holds_alternative<double>(v)) {
        return "number";
    }
    if (std::holds_alternative<bool>(v)) {
        return "boolean";
    }
    if (std::holds_alternative<std::string>(v)) {
        return "string";
    }
    return "list of integers";
}

}  // namespace

std::string provenance_tag(Provenance p) {
    switch (p) {
        case P::paper_default:
        case P::assumed_default:
            return "paper-default";
        case P::user_override:
            return "user-override";
        case P::fitted:
            return "fitted";
        case P::derived:
            return "derived";
    }
    return "derived";
}

ExperimentConfig::ExperimentConfig() {
    auto& e = entries_;
    e["opo.pump_power_mw"] = {130.0, P::paper_default};
    e["opo.threshold_power_mw"] = {120.0, P::paper_default};
    e["opo.linewidth_hz"] = {91e6, P::paper_default};
    e["opo.linewidth_convention"] = {std::string("fwhm"), P::assumed_default};
    e["opo.finesse"] = {100.0, P::paper_default};
    e["opo.escape_efficiency"] = {std::string("fit"), P::assumed_default};
    e["opo.excess_phase_noise"] = {std::string("fit"), P::assumed_default};
    e["opo.extra_loss_a"] = {0.0, P::assumed_default};
    e["opo.extra_loss_b"] = {0.0, P::assumed_default};

    e["targets.v_diff"] = {0.75, P::paper_default};
    e["targets.v_sum"] = {0.89, P::paper_default};
    e["targets.frequency_hz"] = {63.9e6, P::paper_default};

    // MC free spectral ranges follow from the published finesse/linewidth
    // pairs; FMC ranges are not published.
    add_cavity(e, "mc1", 260.0, P::paper_default, 702e6, P::derived, "ring", P::paper_default, 15e6, false, 0.0);
    add_cavity(e, "mc2", 560.0, P::paper_default, 728e6, P::derived, "linear", P::assumed_default, 1.36e6, false,
               0.0);
    add_cavity(e, "fmc_a", 400.0, P::paper_default, 1e9, P::assumed_default, "ring", P::paper_default, 1.36e6, true,
               3.0);
    add_cavity(e, "fmc_b", 400.0, P::paper_default, 1e9, P::assumed_default, "ring", P::paper_default, 1.36e6, true,
               1.4 / 0.9);

    add_detector(e, "a", 810.0, 2.7, 4.0);
    add_detector(e, "b", 1550.0, 1.4, 6.0);

    e["scan.sweep_period_s"] = {20.0, P::assumed_default};
    e["scan.range_rad"] = {2.0 * std::numbers::pi, P::assumed_default};
    e["scan.points"] = {721.0, P::assumed_default};

    e["synthesis.scale"] = {1000.0, P::assumed_default};
    e["synthesis.sample_rate_hz"] = {200e3, P::assumed_default};
    e["synthesis.panel_duration_s"] = {4000.0, P::assumed_default};
    e["synthesis.vacuum_duration_s"] = {2000.0, P::assumed_default};
    e["synthesis.window_s"] = {0.25, P::assumed_default};
    e["synthesis.band_halfwidth_hz"] = {500.0, P::assumed_default};
    e["synthesis.seeds"] = {std::vector<std::uint64_t>{20140901}, P::assumed_default};
    e["synthesis.subtract_dark"] = {false, P::paper_default};

    e["montecarlo.steps"] = {1e7, P::assumed_default};
    e["montecarlo.kappa_dt"] = {0.02, P::assumed_default};
    e["montecarlo.segment_length"] = {2048.0, P::assumed_default};

    e["output.directory"] = {std::string("out"), P::assumed_default};
    e["output.dump_timeseries"] = {false, P::assumed_default};
}

double ExperimentConfig::number(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end() || !std::holds_alternative<double>(it->second.value)) {
        throw ConfigError("no numeric field " + key);
    }
    return std::get<double>(it->second.value);
}

bool ExperimentConfig::flag(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end() || !std::holds_alternative<bool>(it->second.value)) {
        throw ConfigError("no boolean field " + key);
    }
    return std::get<bool>(it->second.value);
}

const std::string& ExperimentConfig::text(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end() || !std::holds_alternative<std::string>(it->second.value)) {
        throw ConfigError("no string field " + key);
    }
    return std::get<std::string>(it->second.value);
}

const std::vector<std::uint64_t>& ExperimentConfig::seeds() const {
    return std::get<std::vector<std::uint64_t>>(entries_.at("synthesis.seeds").value);
}

bool ExperimentConfig::is_fit(const std::string& key) const {
    auto it = entries_.find(key);
    return it != entries_.end() && std::holds_alternative<std::string>(it->second.value) &&
           std::get<std::string>(it->second.value) == "fit";
}

Provenance ExperimentConfig::source(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) {
        throw ConfigError("unknown field " + key);
    }
    return it->second.source;
}

void ExperimentConfig::set(const std::string& key, Value value, Provenance source) {
    auto it = entries_.find(key);
    if (it == entries_.end()) {
        throw ConfigError("unknown field " + key);
    }
    const bool fit_swap = fit_capable().count(key) != 0 &&
                          (std::holds_alternative<double>(value) ||
                           (std::holds_alternative<std::string>(value) && std::get<std::string>(value) == "fit"));
    if (!fit_swap && value.index() != it->second.value.index()) {
        throw ConfigError(key + ": expected a " + describe(it->second.value) + ", got a " + describe(value));
    }
    it->second = {std::move(value), source};
}

std::vector<std::string> ExperimentConfig::assumed_keys() const {
    std::vector<std::string> out;
    for (const auto& [k, e] : entries_) {
        if (e.source == P::assumed_default) {
            out.push_back(k);
        }
    }
    return out;
}

double ExperimentConfig::linewidth_fwhm_hz() const {
    const double lw = number("opo.linewidth_hz");
    return text("opo.linewidth_convention") == "hwhm" ? 2.0 * lw : lw;
}

nopo::OpoParams ExperimentConfig::opo_params(double escape_efficiency, double excess_phase_noise) const {
    nopo::OpoParams p;
    p.pump_power_mw = number("opo.pump_power_mw");
    p.threshold_power_mw = number("opo.threshold_power_mw");
    p.linewidth_fwhm_hz = linewidth_fwhm_hz();
    p.escape_efficiency = escape_efficiency;
    p.excess_phase_noise = excess_phase_noise;
    p.extra_loss_a = number("opo.extra_loss_a");
    p.extra_loss_b = number("opo.extra_loss_b");
    return p;
}

nopo::FitTargets ExperimentConfig::fit_targets() const {
    return {number("targets.v_diff"), number("targets.v_sum"), number("targets.frequency_hz")};
}

detection::DetectorParams ExperimentConfig::detector(const std::string& arm) const {
    const std::string p = "detectors." + arm + ".";
    detection::DetectorParams d;
    d.lo_power_mw = number(p + "lo_power_mw");
    d.dark_clearance_db = number(p + "dark_clearance_db");
    d.demod_freq_hz = number(p + "demod_freq_hz");
    d.lowpass_cutoff_hz = number(p + "lowpass_cutoff_hz");
    return d;
}

std::vector<CavityConfig> ExperimentConfig::cavities() const {
    std::vector<CavityConfig> out;
    for (const std::string name : {"mc1", "mc2", "fmc_a", "fmc_b"}) {
        const std::string p = "cavities." + name + ".";
        const auto geometry = parse_geometry(p + "geometry", text(p + "geometry"));
        const std::string coupling = text(p + "coupling");
        const double finesse = number(p + "finesse");
        const double fsr = number(p + "fsr_hz");
        const double loss = number(p + "round_trip_loss");
        const bool filter = flag(p + "filter");

        CavityConfig c{name, optics::CavityParams::impedance_matched(1.0, 1.0), {}, filter, 0.0};
        try {
            if (coupling == "impedance_matched") {
                if (filter && loss == 0.0) {
                    c.params = optics::impedance_matched_with_peak_transmission(
                        finesse, fsr, number(p + "peak_transmission"), geometry);
                } else {
                    c.params = optics::CavityParams::impedance_matched(finesse, fsr, geometry, loss);
                }
            } else if (coupling == "single_ended") {
                c.params = optics::CavityParams::single_ended(finesse, fsr, geometry, loss);
            } else if (coupling == "over_coupled") {
                c.params = optics::CavityParams::over_coupled(number(p + "r1"), number(p + "r2"), fsr, geometry, loss);
            } else {
                fail(p + "coupling", "expected impedance_matched, single_ended or over_coupled");
            }
            c.modulation = {number(p + "modulation_hz"), number(p + "modulation_depth")};
            c.modulation.validate();
        } catch (const FieldError&) {
            throw;
        } catch (const std::invalid_argument& err) {
            fail(p + "finesse", err.what());
        }
        if (filter) {
            c.carrier_power_w = 1e-3 * number(p + "carrier_power_mw");
        }
        out.push_back(c);
    }
    return out;
}

std::filesystem::path ExperimentConfig::output_directory() const { return text("output.directory"); }

void ExperimentConfig::validate() const {
    const std::string conv = text("opo.linewidth_convention");
    if (conv != "fwhm" && conv != "hwhm") {
        fail("opo.linewidth_convention", "expected 'fwhm' or 'hwhm'");
    }
    for (const std::string key : {"opo.escape_efficiency", "opo.excess_phase_noise"}) {
        const auto& v = entries_.at(key).value;
        if (std::holds_alternative<std::string>(v) && std::get<std::string>(v) != "fit") {
            fail(key, "expected a number or 'fit'");
        }
    }
    if (is_fit("opo.escape_efficiency") != is_fit("opo.excess_phase_noise")) {
        fail("opo.escape_efficiency", "escape_efficiency and excess_phase_noise must both be 'fit' or both numbers");
    }
    if (number("opo.pump_power_mw") < number("opo.threshold_power_mw")) {
        fail("opo.pump_power_mw",
             "pump below threshold: only above-threshold operation (pump >= threshold) is modeled");
    }
    try {
        const double eta = is_fit("opo.escape_efficiency") ? 1.0 : number("opo.escape_efficiency");
        const double excess = is_fit("opo.excess_phase_noise") ? 0.0 : number("opo.excess_phase_noise");
        opo_params(eta, excess).validate();
    } catch (const std::invalid_argument& err) {
        fail("opo", err.what());
    }

    const auto t = fit_targets();
    if (!(t.v_diff > 0.0) || !(t.v_sum > 0.0)) {
        fail("targets", "target variances must be positive");
    }
    if (!(t.frequency_hz > 0.0)) {
        fail("targets.frequency_hz", "must be positive");
    }

    (void)cavities();

    const double scale = number("synthesis.scale");
    if (!(scale > 0.0)) {
        fail("synthesis.scale", "must be positive");
    }
    const double fs = number("synthesis.sample_rate_hz");
    for (const std::string arm : {"a", "b"}) {
        auto d = detector(arm);
        try {
            d.validate();
        } catch (const std::invalid_argument& err) {
            fail("detectors." + arm, err.what());
        }
        if (!(fs > 2.5 * d.demod_freq_hz / scale)) {
            fail("synthesis.sample_rate_hz", "must exceed 2.5x the scaled demodulation frequency");
        }
    }
    if (detector("a").demod_freq_hz != detector("b").demod_freq_hz) {
        fail("detectors.b.demod_freq_hz", "both detectors must demodulate at the same frequency");
    }
    if (detector("a").lowpass_cutoff_hz != detector("b").lowpass_cutoff_hz) {
        fail("detectors.b.lowpass_cutoff_hz", "both detectors must share the low-pass cutoff");
    }
    for (const std::string key : {"synthesis.panel_duration_s", "synthesis.vacuum_duration_s", "synthesis.window_s",
                                  "synthesis.band_halfwidth_hz", "scan.sweep_period_s", "scan.range_rad"}) {
        if (!(number(key) > 0.0)) {
            fail(key, "must be positive");
        }
    }
    if (number("synthesis.window_s") * fs < 16.0) {
        fail("synthesis.window_s", "window too short");
    }
    if (number("scan.points") < 2.0) {
        fail("scan.points", "need at least two points");
    }
    if (seeds().empty()) {
        fail("synthesis.seeds", "seed list must not be empty");
    }
    const double kdt = number("montecarlo.kappa_dt");
    if (!(kdt > 0.0 && kdt < 0.05)) {
        fail("montecarlo.kappa_dt", "must lie in (0, 0.05)");
    }
    const double seg = number("montecarlo.segment_length");
    if (seg < 16.0 || std::fmod(seg, 2.0) != 0.0) {
        fail("montecarlo.segment_length", "must be an even number >= 16");
    }
    if (number("montecarlo.steps") < 2.0 * seg) {
        fail("montecarlo.steps", "need at least two Welch segments");
    }
}

namespace {

struct ParseState {
    std::string origin;
    std::map<std::string, int> lines;
};

std::string where(const ParseState& st, const YAML::Node& node) {
    const auto m = node.Mark();
    return fmt::format("{}:{}:{}", st.origin, m.line + 1, m.column + 1);
}

void apply_node(ExperimentConfig& cfg, ParseState& st, const YAML::Node& node, const std::string& prefix) {
    if (node.IsMap()) {
        for (const auto& kv : node) {
            const std::string name = kv.first.as<std::string>();
            apply_node(cfg, st, kv.second, prefix.empty() ? name : prefix + "." + name);
        }
        return;
    }
    const auto& entries = cfg.entries();
    auto it = entries.find(prefix);
    if (it == entries.end()) {
        throw ConfigError(where(st, node) + ": unknown field '" + prefix + "'");
    }
    st.lines[prefix] = node.Mark().line + 1;
    try {
        const Value& current = it->second.value;
        if (fit_capable().count(prefix) != 0 && node.IsScalar() && node.Scalar() == "fit") {
            cfg.set(prefix, std::string("fit"));
        } else if (std::holds_alternative<double>(current) || fit_capable().count(prefix) != 0) {
            cfg.set(prefix, node.as<double>());
        } else if (std::holds_alternative<bool>(current)) {
            cfg.set(prefix, node.as<bool>());
        } else if (std::holds_alternative<std::string>(current)) {
            cfg.set(prefix, node.as<std::string>());
        } else {
            cfg.set(prefix, node.as<std::vector<std::uint64_t>>());
        }
    } catch (const YAML::Exception&) {
        throw ConfigError(where(st, node) + ": field '" + prefix + "' expects a " + describe(it->second.value));
    }
}

}  // namespace

ExperimentConfig load_config_text(const std::string& text, const std::string& origin) {
    ExperimentConfig cfg;
    ParseState st{origin, {}};
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& err) {
        throw ConfigError(fmt::format("{}:{}:{}: {}", origin, err.mark.line + 1, err.mark.column + 1, err.msg));
    }
    if (root.IsDefined() && !root.IsNull()) {
        if (!root.IsMap()) {
            throw ConfigError(where(st, root) + ": top level must be a mapping");
        }
        apply_node(cfg, st, root, "");
    }
    try {
        cfg.validate();
    } catch (const FieldError& err) {
        // Point at the closest line we saw for this field or its section.
        std::string key = err.key();
        while (!key.empty()) {
            auto it = st.lines.lower_bound(key);
            if (it != st.lines.end() && it->first.rfind(key, 0) == 0) {
                throw ConfigError(fmt::format("{}:{}: {}", origin, it->second, err.what()));
            }
            const auto dot = key.rfind('.');
            key = dot == std::string::npos ? "" : key.substr(0, dot);
        }
        throw ConfigError(origin + ": " + err.what());
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) {
        throw ConfigError("cannot read config file " + path.string());
    }
    std::ostringstream ss;
    ss << is.rdbuf();
    return load_config_text(ss.str(), path.string());
}

}  // namespace twocolor::runner

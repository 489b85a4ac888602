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

#include "twocolor/runner/scenarios.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>

#include <fmt/format.h>

#include "twocolor/optics_chain.h"
#include "twocolor/spectral.h"

namespace twocolor::runner {

namespace {

constexpr double kPi = std::numbers::pi;
using P = Provenance;

enum Stream : std::uint64_t {
    kVacuumSynth = 1,
    kVacuumDarkA = 2,
    kVacuumDarkB = 3,
    kPanelSynth = 10,
    kPanelDarkA = 20,
    kPanelDarkB = 30,
    kLangevin = 40,
};

nopo::OpoParams with_dark(nopo::OpoParams p, const ExperimentConfig& config) {
    const double ea = detection::dark_equivalent_efficiency(config.detector("a").dark_clearance_db);
    const double eb = detection::dark_equivalent_efficiency(config.detector("b").dark_clearance_db);
    p.extra_loss_a = 1.0 - (1.0 - p.extra_loss_a) * ea;
    p.extra_loss_b = 1.0 - (1.0 - p.extra_loss_b) * eb;
    return p;
}

Provenance efficiency_tag(const SourceModel& s, const ExperimentConfig& config, const std::string& key) {
    return s.fitted ? P::fitted : config.source(key);
}

void add_source(Report& r, const SourceModel& s, const ExperimentConfig& config) {
    r.add("opo.sigma", nopo::pump_parameter(s.optical), P::derived);
    r.add("opo.linewidth_fwhm_hz", s.optical.linewidth_fwhm_hz, config.source("opo.linewidth_hz"));
    r.add("opo.kappa_per_s", nopo::amplitude_decay_rate(s.optical), P::derived);
    r.add("opo.escape_efficiency", s.optical.escape_efficiency,
          efficiency_tag(s, config, "opo.escape_efficiency"));
    r.add("opo.excess_phase_noise", s.optical.excess_phase_noise,
          efficiency_tag(s, config, "opo.excess_phase_noise"));
    r.add("dark.efficiency_a", detection::dark_equivalent_efficiency(config.detector("a").dark_clearance_db),
          P::derived);
    r.add("dark.efficiency_b", detection::dark_equivalent_efficiency(config.detector("b").dark_clearance_db),
          P::derived);
    r.add("measured.arm_loss_a", s.measured.extra_loss_a, P::derived);
    r.add("measured.arm_loss_b", s.measured.extra_loss_b, P::derived);
    r.add("measured.total_efficiency_a", s.optical.escape_efficiency * (1.0 - s.measured.extra_loss_a), P::derived);
    r.add("measured.total_efficiency_b", s.optical.escape_efficiency * (1.0 - s.measured.extra_loss_b), P::derived);
}

// ---------------------------------------------------------------------------
// Time-domain pipeline.

struct ArmOutputs {
    std::vector<double> a;
    std::vector<double> b;
    std::vector<double> time_s;  // time of the optical field each sample reflects
    double rate_hz = 0.0;
};

struct PipelineSetup {
    double fs;
    double fd;
    double fc;
    double scale;
    detection::SynthesisOptions options;
};

ArmOutputs run_arms(const PipelineSetup& setup, const detection::CrossSpectrumFn& spectrum,
                    detection::PhaseFn alice, detection::PhaseFn bob, double duration_s, std::uint64_t seed) {
    detection::HomodyneSynthesizer synth(spectrum, {std::move(alice), std::move(bob)}, setup.fs, setup.fd, seed,
                                         setup.options);
    detection::Demodulator demod(setup.fs, setup.fd, setup.fc, 2);
    const auto blocks = static_cast<std::size_t>(
        std::ceil(duration_s * setup.fs / static_cast<double>(synth.block_size())));
    const std::size_t expected = blocks * synth.block_size() / demod.decimation() + 1;

    std::vector<std::vector<double>> pc;
    std::vector<std::vector<double>> out(2);
    out[0].reserve(expected);
    out[1].reserve(expected);
    for (std::size_t k = 0; k < blocks; ++k) {
        synth.next_block(pc);
        demod.process(pc, out);
    }

    // Skip the filter start-up.
    const double delay = demod.group_delay_s();
    const double d = static_cast<double>(demod.decimation());
    std::size_t first = 0;
    while (first < out[0].size() && ((first + 1) * d - 1.0) / setup.fs < 20.0 * delay) {
        ++first;
    }
    ArmOutputs r;
    r.rate_hz = demod.output_rate_hz();
    r.a.assign(out[0].begin() + static_cast<std::ptrdiff_t>(first), out[0].end());
    r.b.assign(out[1].begin() + static_cast<std::ptrdiff_t>(first), out[1].end());
    r.time_s.resize(r.a.size());
    for (std::size_t j = 0; j < r.a.size(); ++j) {
        r.time_s[j] = (static_cast<double>(first + j + 1) * d - 1.0) / setup.fs - delay;
    }
    return r;
}

void add_dark(std::vector<double>& samples, double variance, std::uint64_t seed) {
    if (variance <= 0.0) {
        return;
    }
    detection::TimeSeries ts(1.0, std::move(samples), detection::SampleUnit::quadrature_norm);
    // add_dark_noise works from the clearance; invert it.
    const double clearance = -10.0 * std::log10(variance);
    auto noisy = detection::add_dark_noise(ts, clearance, seed);
    samples.assign(noisy.samples().begin(), noisy.samples().end());
}

double triangle(double u) {
    u -= std::floor(u);
    return u < 0.5 ? 2.0 * u : 2.0 - 2.0 * u;
}

struct WindowStats {
    std::array<double, 4> basis;
    double v_a;
    double v_b;
    double combined;
    double time_s;
};

struct PanelAccumulator {
    std::vector<metrics::HarmonicSample> combined;
    std::vector<metrics::HarmonicSample> alice;
    std::vector<metrics::HarmonicSample> bob;
    std::vector<WindowStats> windows;
};

}  // namespace

const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names{"spectra", "fit", "figure2", "montecarlo", "cavities"};
    return names;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    std::array<std::uint32_t, 2> words;
    seq.generate(words.begin(), words.end());
    return (std::uint64_t{words[0]} << 32) | words[1];
}

SourceModel resolve_source(const ExperimentConfig& config) {
    SourceModel s;
    const auto targets = config.fit_targets();
    if (config.is_fit("opo.escape_efficiency")) {
        const auto fit = nopo::fit_to_measurement(targets, with_dark(config.opo_params(1.0, 0.0), config));
        s.measured = fit.params;
        s.optical = config.opo_params(fit.params.escape_efficiency, fit.params.excess_phase_noise);
        s.fitted = true;
    } else {
        s.optical = config.opo_params(config.number("opo.escape_efficiency"),
                                      config.number("opo.excess_phase_noise"));
        s.optical.validate();
        s.measured = with_dark(s.optical, config);
    }
    s.at_target = nopo::quadrature_spectra(s.measured, targets.frequency_hz);
    s.result = metrics::inseparability(2.0 * s.at_target.v_diff, 2.0 * s.at_target.v_sum);
    return s;
}

Figure2Result compute_figure2(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                              std::ostream* log) {
    Figure2Result res;
    res.source = resolve_source(config);
    const auto& src = res.source;
    const double target_hz = config.fit_targets().frequency_hz;
    const bool subtract_dark = config.flag("synthesis.subtract_dark");
    const bool dump = config.flag("output.dump_timeseries") && !out_dir.empty();

    PipelineSetup setup;
    setup.scale = config.number("synthesis.scale");
    setup.fs = config.number("synthesis.sample_rate_hz");
    const auto det_a = config.detector("a").scaled(setup.scale);
    setup.fd = det_a.demod_freq_hz;
    setup.fc = det_a.lowpass_cutoff_hz;
    setup.options.band_halfwidth_hz = config.number("synthesis.band_halfwidth_hz");

    res.dark_a = detection::dark_noise_variance(config.detector("a").dark_clearance_db);
    res.dark_b = detection::dark_noise_variance(config.detector("b").dark_clearance_db);

    // Lock points from the model as measured at the analysis frequency.
    const auto measured_state = nopo::sideband_state(src.measured, target_hz);
    const auto best = metrics::optimal_angles(measured_state);
    const auto model_state = subtract_dark ? nopo::sideband_state(src.optical, target_hz) : measured_state;

    const double scale = setup.scale;
    const nopo::OpoParams optical = src.optical;
    // A photocurrent component at scaled frequency f carries the sidebands
    // at f * scale from the optical carriers.
    auto spectrum = [optical, scale](double f) -> Eigen::MatrixXd {
        return nopo::sideband_state(optical, std::max(f * scale, 1.0)).cov();
    };
    auto vacuum = [](double) -> Eigen::MatrixXd { return Eigen::MatrixXd::Identity(4, 4); };

    const double range = config.number("scan.range_rad");
    const double period = config.number("scan.sweep_period_s");
    const double center = best.theta_a;
    auto alice = [center, range, period](double t) { return center - 0.5 * range + range * triangle(t / period); };

    const double panel_s = config.number("synthesis.panel_duration_s");
    const double vacuum_s = config.number("synthesis.vacuum_duration_s");
    const double window_s = config.number("synthesis.window_s");
    const std::array<std::string, 2> names{"X", "Xperp"};
    const std::array<double, 2> bob_angles{best.theta_b, best.theta_b - 0.5 * kPi};

    std::array<PanelAccumulator, 2> acc;
    double vac_a_sum = 0.0;
    double vac_b_sum = 0.0;
    double vac_a_se2 = 0.0;
    double vac_b_se2 = 0.0;
    std::size_t vac_windows = 0;
    const auto& seeds = config.seeds();

    for (std::size_t si = 0; si < seeds.size(); ++si) {
        const std::uint64_t seed = seeds[si];
        if (log) {
            *log << fmt::format("figure2: seed {} vacuum run ({} s simulated)\n", seed, vacuum_s);
        }
        auto vac = run_arms(setup, vacuum, [](double) { return 0.0; }, [](double) { return 0.0; }, vacuum_s,
                            derive_seed(seed, kVacuumSynth));
        add_dark(vac.a, res.dark_a, derive_seed(seed, kVacuumDarkA));
        add_dark(vac.b, res.dark_b, derive_seed(seed, kVacuumDarkB));
        const auto window = static_cast<std::size_t>(std::llround(window_s * vac.rate_hz));
        if (window < 2) {
            throw ConfigError("synthesis.window_s: window shorter than two demodulated samples");
        }
        const auto va = detection::variance_estimate(vac.a, window, detection::MeanHandling::known_zero);
        const auto vb = detection::variance_estimate(vac.b, window, detection::MeanHandling::known_zero);
        vac_a_sum += va.variance;
        vac_b_sum += vb.variance;
        vac_a_se2 += va.standard_error * va.standard_error;
        vac_b_se2 += vb.standard_error * vb.standard_error;
        vac_windows += va.windows;
        if (dump) {
            detection::write_binary(detection::TimeSeries(vac.rate_hz, vac.a, detection::SampleUnit::quadrature_norm),
                                    out_dir / fmt::format("vacuum_a_seed{}.tcts", seed));
            detection::write_binary(detection::TimeSeries(vac.rate_hz, vac.b, detection::SampleUnit::quadrature_norm),
                                    out_dir / fmt::format("vacuum_b_seed{}.tcts", seed));
        }

        // Normalization of this seed's records.
        const double da = subtract_dark ? res.dark_a : 0.0;
        const double db = subtract_dark ? res.dark_b : 0.0;
        const double ref_a = va.variance - da;
        const double ref_b = vb.variance - db;

        for (std::size_t p = 0; p < 2; ++p) {
            if (log) {
                *log << fmt::format("figure2: seed {} panel {} ({} s simulated)\n", seed, names[p], panel_s);
            }
            const double bob_angle = bob_angles[p];
            auto rec = run_arms(setup, spectrum, alice, [bob_angle](double) { return bob_angle; }, panel_s,
                                derive_seed(seed, kPanelSynth + p));
            add_dark(rec.a, res.dark_a, derive_seed(seed, kPanelDarkA + p));
            add_dark(rec.b, res.dark_b, derive_seed(seed, kPanelDarkB + p));
            if (dump) {
                detection::write_binary(
                    detection::TimeSeries(rec.rate_hz, rec.a, detection::SampleUnit::quadrature_norm),
                    out_dir / fmt::format("figure2_{}_a_seed{}.tcts", names[p], seed));
                detection::write_binary(
                    detection::TimeSeries(rec.rate_hz, rec.b, detection::SampleUnit::quadrature_norm),
                    out_dir / fmt::format("figure2_{}_b_seed{}.tcts", names[p], seed));
            }

            std::vector<double> angles(window);
            const std::size_t count = rec.a.size() / window;
            for (std::size_t w = 0; w < count; ++w) {
                double saa = 0.0;
                double sbb = 0.0;
                double sab = 0.0;
                for (std::size_t j = 0; j < window; ++j) {
                    const std::size_t i = w * window + j;
                    saa += rec.a[i] * rec.a[i];
                    sbb += rec.b[i] * rec.b[i];
                    sab += rec.a[i] * rec.b[i];
                    angles[j] = alice(rec.time_s[i]);
                }
                const double n = static_cast<double>(window);
                saa /= n;
                sbb /= n;
                sab /= n;
                const double v_a = detection::normalize_to_vacuum(saa, va.variance, res.dark_a, subtract_dark);
                const double v_b = detection::normalize_to_vacuum(sbb, vb.variance, res.dark_b, subtract_dark);
                const double cov = sab / std::sqrt(ref_a * ref_b);
                const double combined = 0.5 * (v_a + v_b - 2.0 * cov);
                const auto basis = metrics::harmonic_basis(angles);
                acc[p].combined.push_back({basis, combined});
                acc[p].alice.push_back({basis, v_a});
                acc[p].bob.push_back({basis, v_b});
                acc[p].windows.push_back({basis, v_a, v_b, combined, rec.time_s[w * window + window / 2]});
            }
        }
    }

    const double ns = static_cast<double>(seeds.size());
    res.vacuum_a = {vac_a_sum / ns, std::sqrt(vac_a_se2) / ns, vac_windows};
    res.vacuum_b = {vac_b_sum / ns, std::sqrt(vac_b_se2) / ns, vac_windows};
    const double rel_a = res.vacuum_a.standard_error / (res.vacuum_a.variance - (subtract_dark ? res.dark_a : 0.0));
    const double rel_b = res.vacuum_b.standard_error / (res.vacuum_b.variance - (subtract_dark ? res.dark_b : 0.0));

    for (std::size_t p = 0; p < 2; ++p) {
        auto& panel = res.panels[p];
        panel.name = names[p];
        panel.bob_angle = bob_angles[p];
        panel.windows = acc[p].combined.size();
        panel.combined = metrics::fit_harmonic_trace(acc[p].combined, metrics::HarmonicWeighting::relative);
        panel.alice = metrics::fit_harmonic_trace(acc[p].alice, metrics::HarmonicWeighting::relative);
        panel.bob = metrics::fit_harmonic_trace(acc[p].bob, metrics::HarmonicWeighting::relative);
        panel.minimum = panel.combined.minimum;

        // d(combined)/d(ln vacuum) for each arm at the minimum.
        const double t = panel.combined.minimum_angle;
        const double va = panel.alice.evaluate(t);
        const double vb = panel.bob.evaluate(t);
        const double c = 0.5 * (va + vb) - panel.minimum;
        const double ga = 0.5 * (va - c) * rel_a;
        const double gb = 0.5 * (vb - c) * rel_b;
        panel.standard_error = std::sqrt(panel.combined.minimum_standard_error * panel.combined.minimum_standard_error +
                                         ga * ga + gb * gb);
        panel.alice_pi_periodic =
            panel.alice.first_harmonic_amplitude <= 3.0 * panel.alice.first_harmonic_standard_error;

        // Model minimum over Alice's angle with Bob held.
        double best_v = std::numeric_limits<double>::infinity();
        double best_t = 0.0;
        for (int k = 0; k < 7200; ++k) {
            const double th = -kPi + 2.0 * kPi * k / 7200.0;
            const double v = 0.5 * metrics::difference_variance(model_state, th, panel.bob_angle);
            if (v < best_v) {
                best_v = v;
                best_t = th;
            }
        }
        panel.analytic_minimum = best_v;
        panel.analytic_angle = best_t;

        if (!out_dir.empty()) {
            CsvWriter trace(out_dir / ("figure2_" + panel.name + ".csv"), "figure2-trace",
                            {"window", "time_s", "alice_angle", "v_a", "v_b", "combined_half"});
            for (std::size_t w = 0; w < acc[p].windows.size(); ++w) {
                const auto& ws = acc[p].windows[w];
                trace.row({static_cast<double>(w), ws.time_s, std::atan2(ws.basis[1], ws.basis[0]), ws.v_a, ws.v_b,
                           ws.combined});
            }
            CsvWriter model(out_dir / ("figure2_" + panel.name + "_model.csv"), "figure2-model",
                            {"alice_angle", "v_a", "v_b", "combined_half", "fit_combined_half"});
            const auto points = static_cast<std::size_t>(config.number("scan.points"));
            std::vector<double> ramp(points);
            for (std::size_t k = 0; k < points; ++k) {
                ramp[k] = -kPi + 2.0 * kPi * static_cast<double>(k) / static_cast<double>(points - 1);
            }
            const auto curve = metrics::scan_trace(model_state, ramp, panel.bob_angle, metrics::FixedSide::bob);
            for (const auto& pt : curve) {
                model.row({pt.angle, pt.v_a, pt.v_b, pt.combined_half, panel.combined.evaluate(pt.angle)});
            }
        }
    }

    res.result = metrics::inseparability(2.0 * res.panels[0].minimum, 2.0 * res.panels[1].minimum);
    res.result.angle_a = res.panels[0].combined.minimum_angle;
    res.result.angle_b = res.panels[0].bob_angle;
    res.result_standard_error = 0.5 * std::hypot(res.panels[0].standard_error, res.panels[1].standard_error);
    return res;
}

MonteCarloResult compute_montecarlo(const ExperimentConfig& config, const nopo::OpoParams& params) {
    MonteCarloResult res;
    res.params = params;
    const double steps = config.number("montecarlo.steps");
    const double kdt = config.number("montecarlo.kappa_dt");
    const auto segment = static_cast<std::size_t>(config.number("montecarlo.segment_length"));
    const double dt = kdt / nopo::amplitude_decay_rate(params);
    const double duration = steps * dt;
    constexpr double kOmegaMin = 0.2;
    constexpr double kOmegaMax = 5.0;

    std::vector<double> freq;
    std::vector<double> sum_d;
    std::vector<double> sum_s;
    for (std::uint64_t seed : config.seeds()) {
        const auto rec = nopo::langevin_oracle(params, duration, dt, derive_seed(seed, kLangevin));
        res.per_seed.push_back(nopo::compare_oracle_spectra(params, rec, segment, kOmegaMin, kOmegaMax));
        const auto pd = detection::welch_psd(rec.difference, segment, segment / 2);
        const auto ps = detection::welch_psd(rec.sum, segment, segment / 2);
        if (freq.empty()) {
            freq = pd.frequency_hz;
            sum_d.assign(freq.size(), 0.0);
            sum_s.assign(freq.size(), 0.0);
        }
        for (std::size_t b = 0; b < freq.size(); ++b) {
            sum_d[b] += pd.density[b];
            sum_s[b] += ps.density[b];
        }
    }
    const double ns = static_cast<double>(config.seeds().size());
    double acc_d = 0.0;
    double acc_s = 0.0;
    for (std::size_t b = 0; b < freq.size(); ++b) {
        const double omega = nopo::normalized_frequency(params, freq[b]);
        if (omega <= 0.0 || omega > 30.0) {
            continue;
        }
        const double d = sum_d[b] / ns;
        const double s = sum_s[b] / ns;
        res.omega.push_back(omega);
        res.welch_diff.push_back(d);
        res.welch_sum.push_back(s);
        if (omega < kOmegaMin || omega > kOmegaMax) {
            continue;
        }
        const auto ref = nopo::quadrature_spectra(params, freq[b]);
        acc_d += (d - ref.v_diff) * (d - ref.v_diff);
        acc_s += (s - ref.v_sum) * (s - ref.v_sum);
        res.averaged.max_abs_error =
            std::max({res.averaged.max_abs_error, std::abs(d - ref.v_diff), std::abs(s - ref.v_sum)});
        ++res.averaged.bins;
    }
    const double nb = static_cast<double>(std::max<std::size_t>(res.averaged.bins, 1));
    res.averaged.rms_error_diff = std::sqrt(acc_d / nb);
    res.averaged.rms_error_sum = std::sqrt(acc_s / nb);
    res.averaged.rms_error = std::sqrt((acc_d + acc_s) / (2.0 * nb));
    return res;
}

// ---------------------------------------------------------------------------
// Scenario drivers.

namespace {

void scenario_spectra(const ExperimentConfig& config, Report& r, const std::filesystem::path& dir) {
    const auto s = resolve_source(config);
    add_source(r, s, config);
    const double hwhm = 0.5 * s.optical.linewidth_fwhm_hz;
    CsvWriter csv(dir / "spectra.csv", "spectra",
                  {"omega", "frequency_hz", "v_diff", "v_sum", "v_diff_measured", "v_sum_measured", "I_measured"});
    constexpr int kPoints = 400;
    const double lo = std::log(0.05);
    const double hi = std::log(30.0);
    for (int k = 0; k < kPoints; ++k) {
        const double omega = std::exp(lo + (hi - lo) * k / (kPoints - 1));
        const double f = omega * hwhm;
        const auto opt = nopo::quadrature_spectra(s.optical, f);
        const auto mes = nopo::quadrature_spectra(s.measured, f);
        csv.row({omega, f, opt.v_diff, opt.v_sum, mes.v_diff, mes.v_sum, 0.5 * (mes.v_diff + mes.v_sum)});
    }
    r.add("target.omega", s.at_target.omega_norm, P::derived);
    r.add("target.v_diff_half", s.at_target.v_diff, P::derived);
    r.add("target.v_sum_half", s.at_target.v_sum, P::derived);
    r.add("result.I", s.result.I, P::derived);
    r.add("result.db", s.result.db, P::derived);
    r.add("csv", std::string("spectra.csv"), P::derived);
}

void scenario_fit(const ExperimentConfig& config, Report& r) {
    const auto s = resolve_source(config);
    const auto t = config.fit_targets();
    add_source(r, s, config);
    r.add("target.v_diff_half", t.v_diff, config.source("targets.v_diff"));
    r.add("target.v_sum_half", t.v_sum, config.source("targets.v_sum"));
    r.add("target.frequency_hz", t.frequency_hz, config.source("targets.frequency_hz"));
    r.add("target.omega", s.at_target.omega_norm, P::derived);
    r.add("achieved.v_diff_half", s.at_target.v_diff, P::derived);
    r.add("achieved.v_sum_half", s.at_target.v_sum, P::derived);
    r.add("residual.v_diff", s.at_target.v_diff - t.v_diff, P::derived);
    r.add("residual.v_sum", s.at_target.v_sum - t.v_sum, P::derived);
    r.add("result.I", s.result.I, P::derived);
    r.add("result.db", s.result.db, P::derived);
    r.add("result.entangled", std::string(s.result.entangled ? "true" : "false"), P::derived);
    const auto optical = nopo::quadrature_spectra(s.optical, t.frequency_hz);
    r.add("dark_corrected.v_diff_half", optical.v_diff, P::derived);
    r.add("dark_corrected.v_sum_half", optical.v_sum, P::derived);
    r.add("dark_corrected.I", 0.5 * (optical.v_diff + optical.v_sum), P::derived);
    r.note("sigma is held fixed; uncertainty in the threshold power is absorbed by the fitted efficiency");
}

void scenario_figure2(const ExperimentConfig& config, Report& r, const std::filesystem::path& dir,
                      std::ostream& log) {
    const auto res = compute_figure2(config, dir, &log);
    add_source(r, res.source, config);
    r.add("vacuum.a", res.vacuum_a.variance, P::derived);
    r.add("vacuum.a_standard_error", res.vacuum_a.standard_error, P::derived);
    r.add("vacuum.b", res.vacuum_b.variance, P::derived);
    r.add("vacuum.b_standard_error", res.vacuum_b.standard_error, P::derived);
    r.add("dark.variance_a", res.dark_a, P::derived);
    r.add("dark.variance_b", res.dark_b, P::derived);
    for (const auto& p : res.panels) {
        const std::string k = "panel." + p.name + ".";
        r.add(k + "bob_angle", p.bob_angle, P::derived);
        r.add(k + "windows", static_cast<double>(p.windows), P::derived);
        r.add(k + "minimum", p.minimum, P::derived);
        r.add(k + "standard_error", p.standard_error, P::derived);
        r.add(k + "minimum_angle", p.combined.minimum_angle, P::derived);
        r.add(k + "model_minimum", p.analytic_minimum, P::derived);
        r.add(k + "model_angle", p.analytic_angle, P::derived);
        r.add(k + "alice_first_harmonic", p.alice.first_harmonic_amplitude, P::derived);
        r.add(k + "alice_first_harmonic_se", p.alice.first_harmonic_standard_error, P::derived);
        r.add(k + "alice_pi_periodic", std::string(p.alice_pi_periodic ? "true" : "false"), P::derived);
        r.add(k + "csv", "figure2_" + p.name + ".csv", P::derived);
    }
    r.add("result.v_diff_half", res.result.v_diff_half, P::derived);
    r.add("result.v_sum_half", res.result.v_sum_half, P::derived);
    r.add("result.I", res.result.I, P::derived);
    r.add("result.I_standard_error", res.result_standard_error, P::derived);
    r.add("result.db", res.result.db, P::derived);
    r.add("result.entangled", std::string(res.result.entangled ? "true" : "false"), P::derived);
}

void scenario_montecarlo(const ExperimentConfig& config, Report& r, const std::filesystem::path& dir,
                         std::ostream& log) {
    const auto s = resolve_source(config);
    add_source(r, s, config);
    log << fmt::format("montecarlo: {} seed(s), {} steps each\n", config.seeds().size(),
                       config.number("montecarlo.steps"));
    const auto res = compute_montecarlo(config, s.optical);
    for (std::size_t i = 0; i < res.per_seed.size(); ++i) {
        const std::string k = fmt::format("seed.{}.", config.seeds()[i]);
        r.add(k + "rms_error", res.per_seed[i].rms_error, P::derived);
        r.add(k + "max_abs_error", res.per_seed[i].max_abs_error, P::derived);
    }
    r.add("averaged.bins", static_cast<double>(res.averaged.bins), P::derived);
    r.add("averaged.rms_error", res.averaged.rms_error, P::derived);
    r.add("averaged.rms_error_diff", res.averaged.rms_error_diff, P::derived);
    r.add("averaged.rms_error_sum", res.averaged.rms_error_sum, P::derived);
    r.add("averaged.max_abs_error", res.averaged.max_abs_error, P::derived);
    r.note("comparison band: omega in [0.2, 5]; errors in vacuum units");
    CsvWriter csv(dir / "montecarlo.csv", "montecarlo", {"omega", "welch_diff", "welch_sum", "v_diff", "v_sum"});
    const double hwhm = 0.5 * s.optical.linewidth_fwhm_hz;
    for (std::size_t b = 0; b < res.omega.size(); ++b) {
        const auto ref = nopo::quadrature_spectra(s.optical, res.omega[b] * hwhm);
        csv.row({res.omega[b], res.welch_diff[b], res.welch_sum[b], ref.v_diff, ref.v_sum});
    }
}

void scenario_cavities(const ExperimentConfig& config, Report& r, const std::filesystem::path& dir) {
    const double sideband_hz = config.detector("a").demod_freq_hz;
    for (const auto& c : config.cavities()) {
        const std::string k = "cavity." + c.name + ".";
        const std::string ck = "cavities." + c.name + ".";
        const double lw = optics::linewidth_from_finesse(c.params);
        r.add(k + "finesse", c.params.finesse(), config.source(ck + "finesse"));
        r.add(k + "fsr_hz", c.params.fsr_hz(), config.source(ck + "fsr_hz"));
        r.add(k + "linewidth_hz", lw, P::derived);
        r.add(k + "r1", c.params.r1(), P::derived);
        r.add(k + "r2", c.params.r2(), P::derived);
        r.add(k + "round_trip_loss", c.params.round_trip_loss(), P::derived);
        const double h = 1e-3 * lw;
        const double slope = (optics::pdh_error_signal(c.params, c.modulation, h) -
                              optics::pdh_error_signal(c.params, c.modulation, -h)) /
                             (2.0 * h);
        r.add(k + "pdh_slope_per_hz", slope, P::derived);
        const bool inside = optics::modulation_within_linewidth(c.params, c.modulation);
        r.add(k + "modulation_within_linewidth", std::string(inside ? "true" : "false"), P::derived);
        if (inside) {
            r.note(fmt::format("warning: {} PDH modulation at {} Hz lies inside the {} Hz linewidth", c.name,
                               format_number(c.modulation.frequency_hz), format_number(lw)));
        }
        if (c.filter) {
            const auto split = optics::filter_cavity_split(c.params, c.carrier_power_w, sideband_hz);
            r.add(k + "lo_power_mw", 1e3 * split.lo_power_w, P::derived);
            r.add(k + "sideband_reflectance", split.sideband_reflectance, P::derived);
            r.add(k + "separation_degraded", std::string(split.separation_degraded ? "true" : "false"),
                  P::derived);
        }

        const double span = std::max(3.0 * c.modulation.frequency_hz, 10.0 * lw);
        CsvWriter csv(dir / (c.name + ".csv"), "cavity",
                      {"detuning_hz", "reflection_re", "reflection_im", "reflection_power", "transmission_power",
                       "pdh_error"});
        constexpr int kPoints = 4001;
        for (int i = 0; i < kPoints; ++i) {
            const double d = -span + 2.0 * span * i / (kPoints - 1);
            const auto rr = optics::reflection_transfer(c.params, d);
            const auto tt = optics::transmission_transfer(c.params, d);
            csv.row({d, rr.real(), rr.imag(), std::norm(rr), std::norm(tt),
                     optics::pdh_error_signal(c.params, c.modulation, d)});
        }
        r.add(k + "csv", c.name + ".csv", P::derived);
    }
}

}  // namespace

ScenarioOutcome run_scenario(const std::string& name, const ExperimentConfig& config, std::ostream& log) {
    ScenarioOutcome out;
    const auto& names = scenario_names();
    if (std::find(names.begin(), names.end(), name) == names.end()) {
        out.exit_code = kExitConfig;
        out.message = "unknown scenario '" + name + "'";
        return out;
    }
    out.directory = config.output_directory() / name;
    Report report(name, config);
    auto write_report = [&] {
        report.add_config(config);
        report.write(out.directory / "report.txt");
    };
    try {
        config.validate();
        std::filesystem::create_directories(out.directory);
        if (name == "spectra") {
            scenario_spectra(config, report, out.directory);
        } else if (name == "fit") {
            scenario_fit(config, report);
        } else if (name == "figure2") {
            scenario_figure2(config, report, out.directory, log);
        } else if (name == "montecarlo") {
            scenario_montecarlo(config, report, out.directory, log);
        } else {
            scenario_cavities(config, report, out.directory);
        }
        write_report();
    } catch (const nopo::FitUnreachable& err) {
        out.exit_code = kExitFitUnreachable;
        out.message = err.what();
        report.note(std::string("fit unreachable: ") + err.what());
        report.add("extremum.omega", err.extremum().omega_norm, P::derived);
        report.add("extremum.v_diff_half", err.extremum().v_diff, P::derived);
        report.add("extremum.v_sum_half", err.extremum().v_sum, P::derived);
        write_report();
    } catch (const ConfigError& err) {
        out.exit_code = kExitConfig;
        out.message = err.what();
    } catch (const std::invalid_argument& err) {
        out.exit_code = kExitConfig;
        out.message = err.what();
    } catch (const std::filesystem::filesystem_error& err) {
        out.exit_code = kExitConfig;
        out.message = err.what();
    } catch (const std::exception& err) {
        out.exit_code = kExitNumerical;
        out.message = err.what();
    }
    return out;
}

}  // namespace twocolor::runner

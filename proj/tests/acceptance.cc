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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "twocolor/detection.h"
#include "twocolor/gaussian_core.h"
#include "twocolor/metrics.h"
#include "twocolor/nopo_engine.h"
#include "twocolor/optics_chain.h"
#include "twocolor/runner/config.h"
#include "twocolor/runner/scenarios.h"

namespace {

using namespace twocolor;
constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool pass;
    std::string detail;
};

Outcome inseparability_arithmetic() {
    const auto r = metrics::inseparability(1.50, 1.78);
    const bool ok = std::abs(r.I - 0.82) <= 1e-12 && std::abs(r.db + 0.8619) <= 1e-4 && r.entangled;
    return {ok, fmt::format("I={:.12f} dB={:.5f}", r.I, r.db)};
}

Outcome fit_reconstruction() {
    const auto start = std::chrono::steady_clock::now();
    const runner::ExperimentConfig cfg;
    const auto src = runner::resolve_source(cfg);
    const auto t = cfg.fit_targets();
    // Feed the fitted parameters back through the forward model.
    const auto back = nopo::quadrature_spectra(src.measured, t.frequency_hz);
    const double res_d = std::abs(back.v_diff - t.v_diff);
    const double res_s = std::abs(back.v_sum - t.v_sum);
    const auto r = metrics::inseparability(2.0 * back.v_diff, 2.0 * back.v_sum);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool ok = src.fitted && res_d < 1e-6 && res_s < 1e-6 && std::abs(r.I - 0.82) <= 1e-6 && secs < 1.0;
    return {ok, fmt::format("sigma={:.6f} eta={:.6f} excess={:.6f} residuals=({:.1e},{:.1e}) I={:.9f} t={:.3f}s",
                            nopo::pump_parameter(src.measured), src.measured.escape_efficiency,
                            src.measured.excess_phase_noise, res_d, res_s, r.I, secs)};
}

Outcome figure2_reproduction() {
    const auto start = std::chrono::steady_clock::now();
    const runner::ExperimentConfig cfg;
    const auto res = runner::compute_figure2(cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double targets[2] = {0.75, 0.89};
    bool ok = secs < 60.0;
    std::string detail;
    for (int k = 0; k < 2; ++k) {
        const auto& p = res.panels[k];
        const bool within = std::abs(p.minimum - targets[k]) <= 3.0 * p.standard_error;
        ok = ok && within && p.standard_error <= 0.01 && p.alice_pi_periodic;
        detail += fmt::format("{}: min={:.4f}+-{:.4f} (target {:.2f}) pi-periodic={} ", p.name, p.minimum,
                              p.standard_error, targets[k], p.alice_pi_periodic);
    }
    detail += fmt::format("I={:.4f}+-{:.4f} t={:.1f}s", res.result.I, res.result_standard_error, secs);
    return {ok, detail};
}

Outcome langevin_spectra() {
    const auto start = std::chrono::steady_clock::now();
    const runner::ExperimentConfig cfg;
    nopo::OpoParams p = cfg.opo_params(1.0, 0.0);
    p.extra_loss_a = 0.0;
    p.extra_loss_b = 0.0;
    const auto mc = runner::compute_montecarlo(cfg, p);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool ok = mc.averaged.rms_error < 0.02 && secs < 120.0;
    return {ok, fmt::format("steps={:.0f} bins={} rms={:.4f} (diff {:.4f}, sum {:.4f}) t={:.1f}s",
                            cfg.number("montecarlo.steps"), mc.averaged.bins, mc.averaged.rms_error,
                            mc.averaged.rms_error_diff, mc.averaged.rms_error_sum, secs)};
}

gaussian::SymplecticOp random_circuit(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::uniform_int_distribution<int> mode(0, n - 1);
    auto op = gaussian::SymplecticOp::identity(n);
    for (int g = 0; g < 6; ++g) {
        const int i = mode(rng);
        int j = mode(rng);
        const int kind = n == 1 ? static_cast<int>(uni(rng) * 2) * 2 : static_cast<int>(uni(rng) * 4);
        if (n > 1) {
            while (j == i) {
                j = mode(rng);
            }
        }
        switch (kind) {
            case 0:
                op = op.then(gaussian::single_mode_squeezer(uni(rng) - 0.5, n, i));
                break;
            case 1:
                op = op.then(gaussian::two_mode_squeezer(0.8 * uni(rng), n, i, j));
                break;
            case 2:
                op = op.then(gaussian::phase_rotation(2.0 * kPi * uni(rng), n, i));
                break;
            default:
                op = op.then(gaussian::beamsplitter(uni(rng), n, i, j));
                break;
        }
    }
    return op;
}

Outcome gaussian_oracle() {
    std::mt19937_64 rng(5150);
    std::normal_distribution<double> normal;
    int agree = 0;
    const int circuits = 50;
    for (int c = 0; c < circuits; ++c) {
        const int n = 1 + c % 3;
        const auto state = random_circuit(n, rng).apply(gaussian::vacuum(n));
        gaussian::Vector coeff(2 * n);
        for (int k = 0; k < 2 * n; ++k) {
            coeff[k] = normal(rng);
        }
        const double exact = gaussian::joint_variance(state, coeff);
        const auto samples = gaussian::sample_oracle(state, 1000000, 1000 + static_cast<std::uint64_t>(c));
        const auto est = gaussian::sample_joint_variance(samples, coeff);
        agree += std::abs(est.variance - exact) <= 3.0 * est.standard_error ? 1 : 0;
    }
    return {agree >= 48, fmt::format("{}/{} circuits within 3 standard errors", agree, circuits)};
}

Outcome separability_boundary() {
    const auto vac = metrics::optimal_angles(gaussian::vacuum(2));
    bool ok = std::abs(vac.result.I - 1.0) <= 1e-12;
    double worst = 0.0;
    for (double r : {0.1, 0.35, 0.7, 1.2}) {
        const auto s = gaussian::two_mode_squeezer(r).apply(gaussian::vacuum(2));
        const double err = std::abs(metrics::optimal_angles(s).result.I - std::exp(-2.0 * r));
        worst = std::max(worst, err);
    }
    ok = ok && worst <= 1e-9;
    return {ok, fmt::format("vacuum I={:.15f} worst TMSS |I-exp(-2r)|={:.1e}", vac.result.I, worst)};
}

Outcome cavity_relations() {
    const runner::ExperimentConfig cfg;
    double lw_mc1 = 0.0;
    double lw_mc2 = 0.0;
    for (const auto& c : cfg.cavities()) {
        if (c.name == "mc1") {
            lw_mc1 = optics::linewidth_from_finesse(c.params);
        } else if (c.name == "mc2") {
            lw_mc2 = optics::linewidth_from_finesse(c.params);
        }
    }
    bool ok = lw_mc1 == 2.7e6 && lw_mc2 == 1.3e6;

    double worst_energy = 0.0;
    for (const auto& p : {optics::CavityParams::impedance_matched(260, 702e6, optics::Geometry::ring),
                          optics::CavityParams::impedance_matched(560, 728e6),
                          optics::CavityParams::over_coupled(0.95, 0.99, 1e9)}) {
        for (int k = -500; k <= 500; ++k) {
            const double d = 1.37e6 * k;
            const double e = std::norm(optics::reflection_transfer(p, d)) + std::norm(optics::transmission_transfer(p, d));
            worst_energy = std::max(worst_energy, std::abs(e - 1.0));
        }
    }
    ok = ok && worst_energy <= 1e-9;

    const auto mc1 = optics::CavityParams::impedance_matched(260, 702e6, optics::Geometry::ring);
    const optics::ModulationParams mod{15e6, 0.1};
    const double at_zero = optics::pdh_error_signal(mc1, mod, 0.0);
    double worst_odd = 0.0;
    for (int k = 1; k <= 200; ++k) {
        const double d = 3.5e5 * k;
        worst_odd = std::max(worst_odd, std::abs(optics::pdh_error_signal(mc1, mod, d) +
                                                 optics::pdh_error_signal(mc1, mod, -d)));
    }
    const double slope = optics::pdh_error_signal(mc1, mod, 1e3) - optics::pdh_error_signal(mc1, mod, -1e3);
    ok = ok && std::abs(at_zero) < 1e-12 && worst_odd < 1e-12 && slope != 0.0;
    return {ok, fmt::format("linewidths {:.0f}/{:.0f} Hz, max||r|^2+|t|^2-1|={:.1e}, PDH(0)={:.1e}, max odd "
                            "residual={:.1e}",
                            lw_mc1, lw_mc2, worst_energy, at_zero, worst_odd)};
}

Outcome detection_calibration() {
    const runner::ExperimentConfig cfg;
    const double scale = cfg.number("synthesis.scale");
    const double fs = cfg.number("synthesis.sample_rate_hz");
    detection::SynthesisOptions opt;
    opt.band_halfwidth_hz = cfg.number("synthesis.band_halfwidth_hz");
    auto det = cfg.detector("a").scaled(scale);
    const double duration = 40.0;

    auto vacuum_record = [&](double theta, std::uint64_t seed) {
        const auto raw = detection::synthesize_bhd([](double) { return 1.0; }, [theta](double) { return theta; }, det,
                                                   duration, fs, seed, opt);
        const auto base = detection::demodulate(raw, det.demod_freq_hz, det.lowpass_cutoff_hz);
        const detection::Demodulator probe(fs, det.demod_freq_hz, det.lowpass_cutoff_hz);
        const auto skip = static_cast<std::size_t>(std::ceil(20.0 * probe.group_delay_s() * base.sample_rate_hz()));
        std::vector<double> s(base.samples().begin() + static_cast<std::ptrdiff_t>(skip), base.samples().end());
        return detection::TimeSeries(base.sample_rate_hz(), std::move(s), base.unit());
    };
    auto estimate = [&](const detection::TimeSeries& ts) {
        const auto window = static_cast<std::size_t>(cfg.number("synthesis.window_s") * ts.sample_rate_hz());
        return detection::variance_estimate(ts, window, detection::MeanHandling::known_zero);
    };

    bool ok = true;
    std::string detail = "vacuum:";
    for (int k = 0; k < 8; ++k) {
        const auto est = estimate(vacuum_record(kPi * k / 4.0, 700 + static_cast<std::uint64_t>(k)));
        const double normalized = detection::normalize_to_vacuum(est.variance, 1.0, 0.0, false);
        ok = ok && std::abs(normalized - 1.0) <= 3.0 * est.standard_error;
        detail += fmt::format(" {:.3f}", normalized);
    }
    for (double clearance : {4.0, 6.0}) {
        const auto base = vacuum_record(0.3, 800 + static_cast<std::uint64_t>(clearance));
        const auto noisy = detection::add_dark_noise(base, clearance, 900 + static_cast<std::uint64_t>(clearance));
        const auto est = estimate(noisy);
        const double want = detection::dark_noise_variance(clearance);
        ok = ok && std::abs(est.variance - 1.0 - want) <= 3.0 * est.standard_error;
        detail += fmt::format("; {:.0f} dB dark adds {:.3f} (expected {:.3f}, se {:.3f})", clearance,
                              est.variance - 1.0, want, est.standard_error);
    }
    return {ok, detail};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"inseparability arithmetic", inseparability_arithmetic},
        {"fit reconstruction", fit_reconstruction},
        {"scaled figure 2 reproduction", figure2_reproduction},
        {"Langevin spectra vs analytic", langevin_spectra},
        {"Gaussian sampling oracle", gaussian_oracle},
        {"separability boundary", separability_boundary},
        {"cavity relations", cavity_relations},
        {"detection chain calibration", detection_calibration},
    };
    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Outcome o{false, ""};
        try {
            o = criteria[k].second();
        } catch (const std::exception& err) {
            o = {false, std::string("exception: ") + err.what()};
        }
        failures += o.pass ? 0 : 1;
        std::printf("%s criterion %zu: %s | %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                    o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}

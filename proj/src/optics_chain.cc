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

#include "twocolor/optics_chain.h"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/tools/roots.hpp>

namespace twocolor::optics {

namespace {

using cplx = std::complex<double>;

void check_fsr(double fsr_hz) {
    if (!(fsr_hz > 0.0) || !std::isfinite(fsr_hz)) {
        throw std::invalid_argument("free spectral range must be positive and finite");
    }
}

void check_loss(double loss) {
    if (!(loss >= 0.0 && loss < 1.0)) {
        throw std::invalid_argument("round-trip loss must lie in [0, 1)");
    }
}

void check_reflectivity(double r, const char* name) {
    if (!(r > 0.0 && r < 1.0)) {
        throw std::invalid_argument(std::string(name) + " must lie in (0, 1)");
    }
}

void check_finesse(double finesse) {
    if (!(finesse > 0.0) || !std::isfinite(finesse)) {
        throw std::invalid_argument("finesse must be positive and finite");
    }
}

cplx round_trip_phasor(const CavityParams& p, double detuning_hz) {
    return std::polar(1.0, 2.0 * std::numbers::pi * detuning_hz / p.fsr_hz());
}

}  // namespace

double finesse_from_round_trip_gain(double g) {
    if (!(g > 0.0 && g < 1.0)) {
        throw std::invalid_argument("round-trip gain must lie in (0, 1)");
    }
    return std::numbers::pi * std::sqrt(g) / (1.0 - g);
}

double round_trip_gain_from_finesse(double finesse) {
    check_finesse(finesse);
    // F (1 - x^2) = pi x with x = sqrt(g).
    const double pi = std::numbers::pi;
    double x = (-pi + std::sqrt(pi * pi + 4.0 * finesse * finesse)) / (2.0 * finesse);
    return x * x;
}

CavityParams CavityParams::impedance_matched(double finesse, double fsr_hz, Geometry geometry,
                                             double round_trip_loss) {
    check_finesse(finesse);
    check_fsr(fsr_hz);
    check_loss(round_trip_loss);
    double rho = round_trip_gain_from_finesse(finesse);
    double g_loss = std::sqrt(1.0 - round_trip_loss);
    CavityParams p;
    p.finesse_ = finesse;
    p.fsr_hz_ = fsr_hz;
    p.coupling_ = Coupling::impedance_matched;
    p.geometry_ = geometry;
    p.loss_ = round_trip_loss;
    p.r1_ = std::sqrt(rho);
    p.r2_ = p.r1_ / g_loss;
    if (!(p.r2_ < 1.0)) {
        throw std::invalid_argument("round-trip loss too large for an impedance-matched cavity of this finesse");
    }
    return p;
}

CavityParams CavityParams::single_ended(double finesse, double fsr_hz, Geometry geometry, double round_trip_loss) {
    check_finesse(finesse);
    check_fsr(fsr_hz);
    check_loss(round_trip_loss);
    double rho = round_trip_gain_from_finesse(finesse);
    double g_loss = std::sqrt(1.0 - round_trip_loss);
    CavityParams p;
    p.finesse_ = finesse;
    p.fsr_hz_ = fsr_hz;
    p.coupling_ = Coupling::single_ended;
    p.geometry_ = geometry;
    p.loss_ = round_trip_loss;
    p.r2_ = 1.0;
    p.r1_ = rho / g_loss;
    if (!(p.r1_ < 1.0)) {
        throw std::invalid_argument("round-trip loss too large for a single-ended cavity of this finesse");
    }
    return p;
}

CavityParams CavityParams::over_coupled(double r1, double r2, double fsr_hz, Geometry geometry,
                                        double round_trip_loss) {
    check_reflectivity(r1, "input coupler reflectivity");
    check_reflectivity(r2, "output coupler reflectivity");
    check_fsr(fsr_hz);
    check_loss(round_trip_loss);
    CavityParams p;
    p.r1_ = r1;
    p.r2_ = r2;
    p.fsr_hz_ = fsr_hz;
    p.coupling_ = Coupling::over_coupled;
    p.geometry_ = geometry;
    p.loss_ = round_trip_loss;
    p.finesse_ = finesse_from_round_trip_gain(p.round_trip_gain());
    return p;
}

double CavityParams::round_trip_gain() const { return r1_ * r2_ * std::sqrt(1.0 - loss_); }

void ModulationParams::validate() const {
    if (!(frequency_hz > 0.0) || !std::isfinite(frequency_hz)) {
        throw std::invalid_argument("modulation frequency must be positive");
    }
    if (!(depth >= 0.0) || !std::isfinite(depth)) {
        throw std::invalid_argument("modulation depth must be non-negative");
    }
}

double linewidth_from_finesse(const CavityParams& params) { return params.fsr_hz() / params.finesse(); }

cplx reflection_transfer(const CavityParams& p, double detuning_hz) {
    if (!std::isfinite(detuning_hz)) {
        throw std::invalid_argument("detuning must be finite");
    }
    cplx e = round_trip_phasor(p, detuning_hz);
    double g_loss = std::sqrt(1.0 - p.round_trip_loss());
    return (-p.r1() + p.r2() * g_loss * e) / (1.0 - p.round_trip_gain() * e);
}

cplx transmission_transfer(const CavityParams& p, double detuning_hz) {
    if (!std::isfinite(detuning_hz)) {
        throw std::invalid_argument("detuning must be finite");
    }
    double t1 = std::sqrt(1.0 - p.r1() * p.r1());
    double t2 = std::sqrt(1.0 - p.r2() * p.r2());
    double single_pass = std::pow(1.0 - p.round_trip_loss(), 0.25);
    cplx half = std::polar(1.0, std::numbers::pi * detuning_hz / p.fsr_hz());
    return t1 * t2 * single_pass * half / (1.0 - p.round_trip_gain() * half * half);
}

double pdh_error_signal(const CavityParams& params, const ModulationParams& mod, double detuning_hz) {
    mod.validate();
    cplx r0 = reflection_transfer(params, detuning_hz);
    cplx rp = reflection_transfer(params, detuning_hz + mod.frequency_hz);
    cplx rm = reflection_transfer(params, detuning_hz - mod.frequency_hz);
    return -mod.depth * (r0 * std::conj(rp) - std::conj(r0) * rm).imag();
}

bool modulation_within_linewidth(const CavityParams& params, const ModulationParams& mod) {
    mod.validate();
    return mod.frequency_hz < params.linewidth_hz();
}

FilterSplit filter_cavity_split(const CavityParams& params, double carrier_power_w, double sideband_freq_hz) {
    if (!(carrier_power_w >= 0.0) || !std::isfinite(carrier_power_w)) {
        throw std::invalid_argument("carrier power must be non-negative");
    }
    double t0 = std::norm(transmission_transfer(params, 0.0));
    double refl = std::norm(reflection_transfer(params, sideband_freq_hz));
    double offset = std::remainder(sideband_freq_hz, params.fsr_hz());
    bool degraded = std::abs(offset) < 3.0 * params.linewidth_hz();
    return {carrier_power_w * t0, refl, degraded};
}

CavityParams impedance_matched_with_peak_transmission(double finesse, double fsr_hz, double peak_transmission,
                                                      Geometry geometry) {
    if (!(peak_transmission > 0.0 && peak_transmission <= 1.0)) {
        throw std::invalid_argument("peak transmission must lie in (0, 1]");
    }
    if (peak_transmission == 1.0) {
        return CavityParams::impedance_matched(finesse, fsr_hz, geometry, 0.0);
    }
    double rho = round_trip_gain_from_finesse(finesse);
    // Peak transmission g (1 - rho / g^2) / (1 - rho) rises monotonically from
    // 0 at g = sqrt(rho) to 1 at g = 1, with g = sqrt(1 - loss).
    auto residual = [&](double g) { return g * (1.0 - rho / (g * g)) / (1.0 - rho) - peak_transmission; };
    boost::uintmax_t max_iter = 200;
    auto [lo, hi] = boost::math::tools::toms748_solve(residual, std::sqrt(rho), 1.0,
                                                      boost::math::tools::eps_tolerance<double>(52), max_iter);
    double g = 0.5 * (lo + hi);
    return CavityParams::impedance_matched(finesse, fsr_hz, geometry, 1.0 - g * g);
}

}  // namespace twocolor::optics

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

#ifndef TWOCOLOR_OPTICS_CHAIN_H
#define TWOCOLOR_OPTICS_CHAIN_H

#include <complex>

/// Frequency-domain models of linear optical cavities: Airy transfer
/// functions, Pound-Drever-Hall error signals and the carrier/sideband split
/// performed by a filter cavity. "Linewidth" always means FWHM.
namespace twocolor::optics {

enum class Geometry { linear, ring };

enum class Coupling {
    impedance_matched,  // input coupling equals all other round-trip losses
    over_coupled,       // explicit input/output amplitude reflectivities
    single_ended,       // perfectly reflecting back mirror
};

/// Two-coupler cavity description. The geometry is descriptive only: a ring
/// cavity's extra high reflector is lumped into the round-trip loss.
class CavityParams {
 public:
    static CavityParams impedance_matched(double finesse, double fsr_hz,
                                          Geometry geometry = Geometry::linear,
                                          double round_trip_loss = 0.0);
    static CavityParams single_ended(double finesse, double fsr_hz,
                                     Geometry geometry = Geometry::linear,
                                     double round_trip_loss = 0.0);
    /// Finesse follows from r1, r2 and the loss.
    static CavityParams over_coupled(double r1, double r2, double fsr_hz,
                                     Geometry geometry = Geometry::linear,
                                     double round_trip_loss = 0.0);

    double finesse() const { return finesse_; }
    double fsr_hz() const { return fsr_hz_; }
    double linewidth_hz() const { return fsr_hz_ / finesse_; }
    Coupling coupling() const { return coupling_; }
    Geometry geometry() const { return geometry_; }
    /// Amplitude reflectivity of the input coupler.
    double r1() const { return r1_; }
    /// Amplitude reflectivity of the output coupler (1 for single-ended).
    double r2() const { return r2_; }
    /// Fractional power loss per round trip, excluding the couplers.
    double round_trip_loss() const { return loss_; }
    /// Round-trip amplitude factor r1 r2 sqrt(1 - loss).
    double round_trip_gain() const;

 private:
    CavityParams() = default;
    double finesse_ = 0.0;
    double fsr_hz_ = 0.0;
    Coupling coupling_ = Coupling::impedance_matched;
    Geometry geometry_ = Geometry::linear;
    double r1_ = 0.0;
    double r2_ = 0.0;
    double loss_ = 0.0;
};

/// Phase modulation used for PDH locking (small-depth limit).
struct ModulationParams {
    double frequency_hz;
    double depth;  // radians

    void validate() const;
};

/// FWHM linewidth fsr / finesse.
double linewidth_from_finesse(const CavityParams& params);

/// Finesse pi sqrt(g) / (1 - g) of a round-trip amplitude factor g.
double finesse_from_round_trip_gain(double g);

/// Round-trip amplitude factor that yields the given finesse.
double round_trip_gain_from_finesse(double finesse);

/// Complex reflection coefficient of the input coupler side.
std::complex<double> reflection_transfer(const CavityParams& params, double detuning_hz);

/// Complex transmission coefficient through the output coupler.
std::complex<double> transmission_transfer(const CavityParams& params, double detuning_hz);

/// Small-depth PDH discriminant, beta * Im[r(D) r*(D + f) - r*(D) r(D - f)]
/// with the mixer phase chosen so the slope through resonance is positive.
double pdh_error_signal(const CavityParams& params, const ModulationParams& mod, double detuning_hz);

/// True when the modulation frequency lies inside the cavity linewidth, where
/// the PDH sidebands are not cleanly reflected.
bool modulation_within_linewidth(const CavityParams& params, const ModulationParams& mod);

struct FilterSplit {
    double lo_power_w;
    double sideband_reflectance;
    /// Sideband within three linewidths of a cavity resonance.
    bool separation_degraded;
};

/// Carrier transmitted as LO, sidebands at sideband_freq_hz reflected.
FilterSplit filter_cavity_split(const CavityParams& params, double carrier_power_w, double sideband_freq_hz);

/// Impedance-matched cavity of the given finesse whose intracavity loss gives
/// the requested on-resonance power transmission.
CavityParams impedance_matched_with_peak_transmission(double finesse, double fsr_hz, double peak_transmission,
                                                      Geometry geometry = Geometry::linear);

}  // namespace twocolor::optics

#endif  // TWOCOLOR_OPTICS_CHAIN_H

// Copyright 2026 The iontrap Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Linear Paul trap figures of merit: Mathieu parameters, the radial
// pseudopotential and its secular frequency, the calibrated endcap law for
// the axial frequency, thermal localization and addressing crosstalk.

#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "iontrap/core_physics.hpp"
#include "iontrap/error.hpp"

namespace iontrap {

struct TrapConfig {
  IonSpecies species;
  double rf_amplitude = 0.0;      // V
  double dc_offset = 0.0;         // V
  double rf_frequency = 0.0;      // rad/s
  double r0 = 0.0;                // m
  double endcap_voltage = 0.0;    // V
  double shielding_factor = 1.0;  // relative to the calibrated trap, (0, 1]
};

inline void validate(const TrapConfig& trap) {
  using detail::require;
  require(trap.species.mass > 0.0, "species mass must be positive");
  require(trap.rf_amplitude > 0.0, "RF amplitude must be positive");
  require(trap.rf_frequency > 0.0, "RF frequency must be positive");
  require(trap.r0 > 0.0, "r0 must be positive");
  require(trap.endcap_voltage >= 0.0, "endcap voltage must not be negative");
  require(trap.shielding_factor > 0.0 && trap.shielding_factor <= 1.0,
          "shielding factor must lie in (0, 1]");
}

/// The operating point quoted for the reference trap.
inline TrapConfig reference_trap(const IonSpecies& species) {
  return {species, 500.0, 0.0, kTwoPi * 11.5e6, 1.4e-3, 150.0, 1.0};
}

struct MathieuParameters {
  double a = 0.0;
  double q = 0.0;
};

inline MathieuParameters mathieu_parameters(const TrapConfig& trap) {
  validate(trap);
  const double denom = trap.species.mass * trap.rf_frequency * trap.rf_frequency *
                       trap.r0 * trap.r0;
  const double e = trap.species.charge();
  return {4.0 * e * trap.dc_offset / denom, 2.0 * e * trap.rf_amplitude / denom};
}

/// Pseudopotential energy at rho = r0, e^2 Phi_RF^2 / (4 M w_RF^2 r0^2),
/// returned in eV.
inline double pseudopotential_depth(const TrapConfig& trap) {
  validate(trap);
  const double e = trap.species.charge();
  const double joules = e * e * trap.rf_amplitude * trap.rf_amplitude /
                        (4.0 * trap.species.mass * trap.rf_frequency *
                         trap.rf_frequency * trap.r0 * trap.r0);
  return joules / kElectronVolt;
}

/// Above this q the pseudopotential picture is flagged as suspect.
inline constexpr double kPseudopotentialQLimit = 0.9;

/// Radial secular frequency e Phi_RF / (sqrt2 M w_RF r0^2), in rad/s.
inline Flagged<double> secular_frequency(const TrapConfig& trap) {
  validate(trap);
  Flagged<double> out;
  out.value = trap.species.charge() * trap.rf_amplitude /
              (std::numbers::sqrt2 * trap.species.mass * trap.rf_frequency *
               trap.r0 * trap.r0);
  const double q = mathieu_parameters(trap).q;
  if (q >= kPseudopotentialQLimit)
    out.warnings.push_back("mathieu q = " + std::to_string(q) +
                           " >= 0.9: pseudopotential approximation suspect");
  return out;
}

/// One-point calibration of the endcap law w_x = w_ref sqrt(V / V_ref). The
/// default anchor is 150 V giving 2 pi x 200 kHz.
struct AxialCalibration {
  double reference_voltage = 150.0;           // V
  double reference_frequency = kTwoPi * 200e3;  // rad/s
};

/// Axial frequency for an endcap voltage. The trap's shielding factor
/// scales the effective potential relative to the calibrated trap.
inline double axial_frequency(double endcap_voltage, const TrapConfig& trap,
                              const AxialCalibration& cal = {}) {
  detail::require(endcap_voltage >= 0.0, "endcap voltage must not be negative");
  detail::require(trap.shielding_factor > 0.0 && trap.shielding_factor <= 1.0,
                  "shielding factor must lie in (0, 1]");
  detail::require(cal.reference_voltage > 0.0 && cal.reference_frequency > 0.0,
                  "axial calibration must be positive");
  return cal.reference_frequency *
         std::sqrt(trap.shielding_factor * endcap_voltage / cal.reference_voltage);
}

/// 1-sigma thermal radius sqrt(k_B T / (M w_r^2)).
inline double thermal_localization(double temperature, double radial_frequency,
                                   const IonSpecies& species) {
  detail::require(temperature >= 0.0, "temperature must not be negative");
  detail::require(radial_frequency > 0.0, "radial frequency must be positive");
  return std::sqrt(kConstants.boltzmann * temperature /
                   (species.mass * radial_frequency * radial_frequency));
}

/// Relative intensity of a Gaussian addressing beam at the neighbouring ion,
/// exp(-2 s^2 / w^2) with w half the 1/e^2 spot diameter.
inline double crosstalk(double ion_spacing, double spot_diameter) {
  detail::require(ion_spacing > 0.0, "ion spacing must be positive");
  detail::require(spot_diameter >= 0.0, "spot diameter must not be negative");
  if (spot_diameter == 0.0) return 0.0;
  const double w = 0.5 * spot_diameter;
  return std::exp(-2.0 * ion_spacing * ion_spacing / (w * w));
}

/// Quoted Doppler temperature, the default for localization.
inline constexpr double kQuotedDopplerTemperature = 85e-6;  // K

struct TrapReport {
  double mathieu_a = 0.0;
  double mathieu_q = 0.0;
  double secular_frequency = 0.0;   // rad/s
  double pseudo_well_depth = 0.0;   // eV
  double axial_frequency = 0.0;     // rad/s
  double localization_radius = 0.0; // m
  double temperature = 0.0;         // K
  std::vector<std::string> warnings;
};

inline TrapReport evaluate_trap(const TrapConfig& trap,
                                double temperature = kQuotedDopplerTemperature,
                                const AxialCalibration& cal = {}) {
  validate(trap);
  TrapReport r;
  const auto mp = mathieu_parameters(trap);
  r.mathieu_a = mp.a;
  r.mathieu_q = mp.q;
  const auto wr = secular_frequency(trap);
  r.secular_frequency = wr.value;
  r.warnings = wr.warnings;
  r.pseudo_well_depth = pseudopotential_depth(trap);
  r.axial_frequency = axial_frequency(trap.endcap_voltage, trap, cal);
  r.temperature = temperature;
  r.localization_radius = thermal_localization(temperature, wr.value, trap.species);
  return r;
}

}  // namespace iontrap

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

// Laser-ion coupling scalars and the pulse-duration, power and error budgets
// that follow from them.
//
// Geometry convention: `axial_projection` is k_L . e_x / |k_L| for a single
// laser. For a Raman pair it is (k_p - k_s) . e_x / (2|k|), the fraction of
// the counter-propagating maximum, so both lie in (0, 1].

#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "iontrap/core_physics.hpp"
#include "iontrap/error.hpp"

namespace iontrap {

enum class LaserScheme { single, raman };

inline std::string to_string(LaserScheme s) {
  return s == LaserScheme::single ? "single" : "raman";
}

/// sin(10 deg): addressing beam tilted 10 degrees from the normal to the
/// ion string.
inline const double kDefaultAxialProjection = std::sin(10.0 * kPi / 180.0);

struct LaserParams {
  LaserScheme scheme = LaserScheme::single;
  double wavelength = 729.147e-9;  // m; qubit line, or pump/Stokes for Raman
  double field = 0.0;              // V/m, single laser
  double pump_field = 0.0;         // V/m, Raman
  double stokes_field = 0.0;       // V/m, Raman
  double polarization_factor = 1.0;  // beta
  double raman_detuning = 0.0;       // delta, rad/s
  std::optional<double> axial_projection;  // see file comment
  double spot_radius = 10e-6;              // 1/e^2 radius w0, m
};

/// The geometry factor actually used. Single-laser calculations default to
/// the 10 degree addressing geometry; Raman geometry has no default.
inline double resolved_projection(const LaserParams& p) {
  if (p.axial_projection) {
    detail::require(*p.axial_projection > 0.0 && *p.axial_projection <= 1.0,
                    "axial projection must lie in (0, 1]");
    return *p.axial_projection;
  }
  if (p.scheme == LaserScheme::raman)
    throw InvalidArgument("Raman beam geometry (axial projection) must be given");
  return kDefaultAxialProjection;
}

inline void validate(const LaserParams& p) {
  using detail::require;
  require(p.wavelength > 0.0, "wavelength must be positive");
  require(p.polarization_factor > 0.0 && p.polarization_factor <= 1.0,
          "polarization factor must lie in (0, 1]");
  require(p.spot_radius > 0.0, "spot radius must be positive");
  if (p.scheme == LaserScheme::raman)
    require(p.raman_detuning != 0.0, "Raman detuning must be non-zero");
  resolved_projection(p);
}

/// Axial component of the (effective) wavevector.
inline double axial_wavenumber(const LaserParams& p) {
  const double k = kTwoPi / p.wavelength;
  const double proj = resolved_projection(p);
  return p.scheme == LaserScheme::single ? k * proj : 2.0 * k * proj;
}

/// eta = sqrt(hbar / (2 M wx)) k_axial.
inline double lamb_dicke(const IonSpecies& species, double axial_frequency,
                         const LaserParams& params) {
  validate(params);
  detail::require(axial_frequency > 0.0, "axial frequency must be positive");
  return std::sqrt(kConstants.reduced_planck /
                   (2.0 * species.mass * axial_frequency)) *
         axial_wavenumber(params);
}

namespace detail {

/// sqrt(A / (c alpha k^3)) for the line that sets the coupling, in m.
inline double dipole_length(const Transition& t) {
  const double k = t.wavenumber();
  return std::sqrt(t.einstein_A /
                   (kConstants.speed_of_light * kConstants.fine_structure * k * k * k));
}

}  // namespace detail

/// Rabi frequency Omega_0 (rad/s). For Raman beams the result is flagged when
/// |delta| is not at least ten times Omega_0.
inline Flagged<double> rabi_zero(const LaserParams& params, const Transition& line) {
  validate(params);
  const double e = kConstants.elementary_charge;
  const double hbar = kConstants.reduced_planck;
  const double beta = params.polarization_factor;
  const double d = detail::dipole_length(line);
  Flagged<double> out;
  if (params.scheme == LaserScheme::single) {
    out.value = e * params.field / hbar * d * beta;
  } else {
    out.value = (e * e * d * d / (hbar * hbar)) * params.pump_field *
                params.stokes_field / (4.0 * params.raman_detuning) * beta;
    if (std::abs(params.raman_detuning) < 10.0 * std::abs(out.value))
      out.warnings.push_back(
          "Raman detuning below 10x Omega_0: virtual-level approximation suspect");
  }
  return out;
}

/// Omega_1 = (eta / sqrt N) Omega_0; flagged once eta / sqrt N exceeds 0.3.
inline Flagged<double> rabi_one(double rabi_zero, double eta, int ion_count) {
  detail::require(ion_count >= 1, "ion count must be at least 1");
  const double ratio = eta / std::sqrt(static_cast<double>(ion_count));
  Flagged<double> out{ratio * rabi_zero, {}};
  if (ratio > 0.3)
    out.warnings.push_back("eta/sqrt(N) = " + std::to_string(ratio) +
                           " > 0.3: first-order sideband expansion suspect");
  return out;
}

/// Lower bounds ("must greatly exceed") on pulse durations, in seconds.
struct PulseBounds {
  double t_v_min = 0.0;
  double t_u_traveling_min = 0.0;
  double t_u_standing_min = 0.0;
};

inline PulseBounds pulse_bounds(int ion_count, double eta, double axial_frequency) {
  detail::require(ion_count >= 1, "ion count must be at least 1");
  detail::require(eta > 0.0, "eta must be positive");
  detail::require(axial_frequency > 0.0, "axial frequency must be positive");
  const double root_n = std::sqrt(static_cast<double>(ion_count));
  return {kPi * eta / (root_n * axial_frequency),
          kPi * root_n / (eta * axial_frequency), 2.6 * kPi / axial_frequency};
}

struct PowerReport {
  double power = 0.0;  // W (per beam for Raman)
  double eta = 0.0;
  double rabi_one = 0.0;   // rad/s
  double rabi_zero = 0.0;  // rad/s
  double field = 0.0;      // V/m (per beam for Raman)
  /// A closed-form shortcut that is not dimensionally consistent; kept for
  /// comparison only.
  double closed_form_power = 0.0;
  std::vector<std::string> derivation;
};

/// Laser power needed for a U-type pi pulse of duration t_u, worked out from
/// the Rabi chain: Omega_1 = pi / t_u, Omega_0 = sqrt(N) Omega_1 / eta, E from
/// Omega_0, then P = (c eps0 / 4) pi w0^2 |E|^2. Raman assumes equal pump and
/// Stokes powers and reports the power per beam.
inline PowerReport laser_power(const LaserParams& params, const IonSpecies& species,
                               const Transition& line, int ion_count,
                               double axial_frequency, double t_u) {
  validate(params);
  detail::require(t_u > 0.0, "pulse duration must be positive");
  detail::require(ion_count >= 1, "ion count must be at least 1");
  const double hbar = kConstants.reduced_planck;
  const double e = kConstants.elementary_charge;
  const double c = kConstants.speed_of_light;
  const double beta = params.polarization_factor;
  const double n = static_cast<double>(ion_count);

  PowerReport r;
  r.eta = lamb_dicke(species, axial_frequency, params);
  r.rabi_one = kPi / t_u;
  r.rabi_zero = std::sqrt(n) * r.rabi_one / r.eta;
  const double d = detail::dipole_length(line);
  double field_sq = 0.0;
  if (params.scheme == LaserScheme::single) {
    r.field = r.rabi_zero * hbar / (e * d * beta);
    field_sq = r.field * r.field;
  } else {
    field_sq = 4.0 * std::abs(params.raman_detuning) * r.rabi_zero * hbar * hbar /
               (e * e * d * d * beta);
    r.field = std::sqrt(field_sq);
  }
  const double w0 = params.spot_radius;
  r.power = c * kConstants.vacuum_permittivity / 4.0 * kPi * w0 * w0 * field_sq;

  const double omega_l = kTwoPi * c / params.wavelength;
  const double m = species.mass;
  if (params.scheme == LaserScheme::single) {
    r.closed_form_power =
        hbar * w0 * w0 * omega_l * axial_frequency * n * m / (line.einstein_A * t_u * t_u);
  } else {
    r.closed_form_power = hbar * w0 * w0 * omega_l * omega_l *
                              std::abs(params.raman_detuning) * n * m /
                              (c * line.einstein_A * t_u) *
                              std::sqrt(n * m * hbar * axial_frequency);
  }

  std::ostringstream log;
  log.precision(6);
  auto push = [&](auto&&... parts) {
    log.str("");
    (log << ... << parts);
    r.derivation.push_back(log.str());
  };
  push("eta = ", r.eta, " (axial projection ", resolved_projection(params), ")");
  push("Omega_1 = pi / t_U = ", r.rabi_one, " rad/s");
  push("Omega_0 = sqrt(N) Omega_1 / eta = ", r.rabi_zero, " rad/s");
  push("line ", line.label, ": A = ", line.einstein_A, " 1/s, beta = ", beta);
  push("E = ", r.field, " V/m", params.scheme == LaserScheme::raman ? " per beam" : "");
  push("P = (c eps0 / 4) pi w0^2 |E|^2 = ", r.power, " W");
  return r;
}

enum class ErrorScheme { standing, traveling, raman };

inline std::string to_string(ErrorScheme s) {
  switch (s) {
    case ErrorScheme::standing: return "standing";
    case ErrorScheme::traveling: return "traveling";
    case ErrorScheme::raman: return "raman";
  }
  return "?";
}

/// Minimum error probability per CNOT for Ca+ under the given addressing
/// scheme.
inline double gate_error(ErrorScheme scheme, int ion_count) {
  detail::require(ion_count >= 1, "ion count must be at least 1");
  const double n = static_cast<double>(ion_count);
  switch (scheme) {
    case ErrorScheme::standing: return 8.9e-6 * std::cbrt(n);
    case ErrorScheme::traveling: return 3.6e-5 * std::sqrt(n);
    case ErrorScheme::raman: return 1.3e-8 * std::sqrt(n);
  }
  throw InvalidArgument("unknown error scheme");
}

struct ToleranceReport {
  double eta = 0.0;
  double t_v_min = 0.0;
  double t_u_traveling_min = 0.0;
  double t_u_standing_min = 0.0;
  double power = 0.0;
  double gate_error = 0.0;
  PowerReport power_detail;
};

inline ToleranceReport evaluate_tolerances(const LaserParams& params,
                                           const IonSpecies& species,
                                           const Transition& line, int ion_count,
                                           double axial_frequency, double t_u,
                                           ErrorScheme error_scheme) {
  ToleranceReport r;
  r.eta = lamb_dicke(species, axial_frequency, params);
  const auto b = pulse_bounds(ion_count, r.eta, axial_frequency);
  r.t_v_min = b.t_v_min;
  r.t_u_traveling_min = b.t_u_traveling_min;
  r.t_u_standing_min = b.t_u_standing_min;
  r.power_detail = laser_power(params, species, line, ion_count, axial_frequency, t_u);
  r.power = r.power_detail.power;
  r.gate_error = gate_error(error_scheme, ion_count);
  return r;
}

}  // namespace iontrap

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

// Physical constants, unit conventions and the ion species table.
//
// Everything is SI internally. Frequencies are angular (rad/s); callers that
// think in ordinary frequencies multiply by kTwoPi at the boundary.

#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "iontrap/error.hpp"

namespace iontrap {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// CODATA 2018 values.
struct PhysicalConstants {
  double elementary_charge = 1.602176634e-19;     // C
  double vacuum_permittivity = 8.8541878128e-12;  // F/m
  double reduced_planck = 1.054571817e-34;        // J s
  double boltzmann = 1.380649e-23;                // J/K
  double speed_of_light = 299792458.0;            // m/s
  double fine_structure = 7.2973525693e-3;
  double atomic_mass_unit = 1.66053906660e-27;    // kg

  /// e^2 / (4 pi eps0), in J m.
  constexpr double coulomb_energy_length() const {
    return elementary_charge * elementary_charge /
           (4.0 * std::numbers::pi * vacuum_permittivity);
  }
};

inline constexpr PhysicalConstants kConstants{};

inline constexpr double kElectronVolt = kConstants.elementary_charge;  // J

enum class TransitionKind { dipole, quadrupole };

inline std::string to_string(TransitionKind kind) {
  return kind == TransitionKind::dipole ? "dipole" : "quadrupole";
}

inline TransitionKind transition_kind_from_string(std::string_view s) {
  if (s == "dipole") return TransitionKind::dipole;
  if (s == "quadrupole") return TransitionKind::quadrupole;
  throw InvalidArgument("unknown transition kind '" + std::string(s) + "'");
}

/// One radiative line. `lifetime` is the upper-level lifetime, so
/// einstein_A * lifetime equals the branching ratio of this decay channel
/// (1 for a level with a single decay path).
struct Transition {
  std::string label;
  double wavelength = 0.0;  // m
  double einstein_A = 0.0;  // 1/s
  double lifetime = 0.0;    // s
  TransitionKind kind = TransitionKind::dipole;
  double branching_ratio = 1.0;
  double branching_tolerance = 0.02;

  double wavenumber() const { return kTwoPi / wavelength; }
  double angular_frequency() const {
    return kTwoPi * kConstants.speed_of_light / wavelength;
  }
  /// Natural linewidth of the upper level, 1/lifetime, in rad/s.
  double linewidth() const { return 1.0 / lifetime; }

  bool consistent() const {
    return std::abs(einstein_A * lifetime - branching_ratio) <=
           branching_tolerance;
  }
};

struct IonSpecies {
  std::string name;
  double mass = 0.0;  // kg
  int charge_multiplier = 1;
  std::vector<Transition> transitions;

  double charge() const { return charge_multiplier * kConstants.elementary_charge; }

  /// Lookup by exact label, e.g. "S1/2-D5/2".
  const Transition& transition(std::string_view label) const {
    for (const auto& t : transitions)
      if (t.label == label) return t;
    throw InvalidArgument("species " + name + " has no transition '" +
                          std::string(label) + "'");
  }

  /// The line whose wavelength is closest to `wavelength`, within 1 nm.
  const Transition& transition_near(double wavelength) const {
    const Transition* best = nullptr;
    for (const auto& t : transitions)
      if (!best || std::abs(t.wavelength - wavelength) <
                       std::abs(best->wavelength - wavelength))
        best = &t;
    if (!best || std::abs(best->wavelength - wavelength) > 1e-9)
      throw InvalidArgument("species " + name + " has no line near " +
                            std::to_string(wavelength * 1e9) + " nm");
    return *best;
  }
};

inline void validate(const IonSpecies& species) {
  using detail::require;
  require(!species.name.empty(), "species name must not be empty");
  require(species.mass > 0.0, "species mass must be positive");
  require(species.charge_multiplier == 1,
          "only singly ionized species are supported");
  for (const auto& t : species.transitions) {
    require(t.wavelength > 0.0 && t.einstein_A > 0.0 && t.lifetime > 0.0,
            "transition " + t.label + " has a non-positive entry");
    require(t.consistent(), "transition " + t.label +
                                ": einstein_A * lifetime disagrees with the "
                                "documented branching ratio");
  }
}

// JSON mapping. Field names mirror the structs exactly.

inline void to_json(nlohmann::json& j, const Transition& t) {
  j = nlohmann::json{{"label", t.label},
                     {"wavelength", t.wavelength},
                     {"einstein_A", t.einstein_A},
                     {"lifetime", t.lifetime},
                     {"kind", to_string(t.kind)},
                     {"branching_ratio", t.branching_ratio},
                     {"branching_tolerance", t.branching_tolerance}};
}

inline void from_json(const nlohmann::json& j, Transition& t) {
  j.at("label").get_to(t.label);
  j.at("wavelength").get_to(t.wavelength);
  j.at("einstein_A").get_to(t.einstein_A);
  j.at("lifetime").get_to(t.lifetime);
  t.kind = transition_kind_from_string(j.at("kind").get<std::string>());
  t.branching_ratio = j.value("branching_ratio", 1.0);
  t.branching_tolerance = j.value("branching_tolerance", 0.02);
}

inline void to_json(nlohmann::json& j, const IonSpecies& s) {
  j = nlohmann::json{{"name", s.name},
                     {"mass", s.mass},
                     {"charge_multiplier", s.charge_multiplier},
                     {"transitions", s.transitions}};
}

inline void from_json(const nlohmann::json& j, IonSpecies& s) {
  j.at("name").get_to(s.name);
  j.at("mass").get_to(s.mass);
  s.charge_multiplier = j.value("charge_multiplier", 1);
  s.transitions = j.at("transitions").get<std::vector<Transition>>();
}

/// Parses and validates a species record.
inline IonSpecies species_from_json(const nlohmann::json& j) {
  IonSpecies s;
  try {
    s = j.get<IonSpecies>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed species record: ") + e.what());
  }
  validate(s);
  return s;
}

inline IonSpecies load_species_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open species file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("species file " + path + ": " + e.what());
  }
  return species_from_json(j);
}

// Embedded species dataset. Wavelengths are air values; lifetimes of the P
// levels are shared between their decay channels, and einstein_A of each
// channel is branching_ratio / lifetime.
inline constexpr std::string_view kSpeciesDataset = R"json({
  "dataset_version": 1,
  "species": [
    {
      "name": "ca40",
      "mass": 6.6358532e-26,
      "charge_multiplier": 1,
      "transitions": [
        {"label": "S1/2-P1/2", "wavelength": 396.847e-9, "einstein_A": 1.317e8,
         "lifetime": 7.098e-9, "kind": "dipole",
         "branching_ratio": 0.9347, "branching_tolerance": 0.01},
        {"label": "D3/2-P1/2", "wavelength": 866.214e-9, "einstein_A": 9.20e6,
         "lifetime": 7.098e-9, "kind": "dipole",
         "branching_ratio": 0.0653, "branching_tolerance": 0.01},
        {"label": "S1/2-P3/2", "wavelength": 393.366e-9, "einstein_A": 1.351e8,
         "lifetime": 6.924e-9, "kind": "dipole",
         "branching_ratio": 0.9353, "branching_tolerance": 0.01},
        {"label": "D5/2-P3/2", "wavelength": 854.209e-9, "einstein_A": 8.48e6,
         "lifetime": 6.924e-9, "kind": "dipole",
         "branching_ratio": 0.0587, "branching_tolerance": 0.01},
        {"label": "D3/2-P3/2", "wavelength": 849.802e-9, "einstein_A": 9.5e5,
         "lifetime": 6.924e-9, "kind": "dipole",
         "branching_ratio": 0.0066, "branching_tolerance": 0.005},
        {"label": "S1/2-D5/2", "wavelength": 729.147e-9, "einstein_A": 0.9434,
         "lifetime": 1.06, "kind": "quadrupole",
         "branching_ratio": 1.0, "branching_tolerance": 0.01},
        {"label": "S1/2-D3/2", "wavelength": 732.389e-9, "einstein_A": 0.9259,
         "lifetime": 1.08, "kind": "quadrupole",
         "branching_ratio": 1.0, "branching_tolerance": 0.01}
      ]
    }
  ]
})json";

inline const nlohmann::json& species_dataset() {
  static const nlohmann::json dataset = nlohmann::json::parse(kSpeciesDataset);
  return dataset;
}

inline std::vector<std::string> species_names() {
  std::vector<std::string> names;
  for (const auto& s : species_dataset().at("species"))
    names.push_back(s.at("name").get<std::string>());
  return names;
}

inline IonSpecies lookup_species(std::string_view name) {
  for (const auto& s : species_dataset().at("species"))
    if (s.at("name").get<std::string>() == name) return species_from_json(s);
  throw InvalidArgument("unknown ion species '" + std::string(name) + "'");
}

/// 40Ca+, the reference species.
inline IonSpecies ca40_species() {
  static const IonSpecies ca40 = lookup_species("ca40");
  return ca40;
}

/// Doppler cooling limit T = hbar Gamma / (2 k_B) for a line of natural
/// linewidth Gamma (rad/s).
inline double doppler_limit(double linewidth) {
  detail::require(linewidth > 0.0, "linewidth must be positive");
  return kConstants.reduced_planck * linewidth / (2.0 * kConstants.boltzmann);
}

/// Inverse of doppler_limit: the linewidth that yields temperature T.
inline double doppler_linewidth(double temperature) {
  detail::require(temperature > 0.0, "temperature must be positive");
  return 2.0 * kConstants.boltzmann * temperature / kConstants.reduced_planck;
}

}  // namespace iontrap

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

// Linear ion chain in a harmonic axial well: equilibrium positions, the
// axial normal modes and the per-ion coupling constants to each mode.
//
// Internally the problem is solved in units of the length scale
//   l = (e^2 / (4 pi eps0 M wx^2))^(1/3),
// in which the equilibrium condition and the Hessian are species-free.

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "iontrap/core_physics.hpp"
#include "iontrap/detail/linalg.hpp"
#include "iontrap/error.hpp"

namespace iontrap {

struct ChainConfig {
  IonSpecies species;
  int ion_count = 1;
  double axial_frequency = 0.0;  // rad/s
};

inline void validate(const ChainConfig& config) {
  detail::require(config.ion_count >= 1, "ion count must be at least 1");
  detail::require(config.axial_frequency > 0.0,
                  "axial frequency must be positive");
  detail::require(config.species.mass > 0.0, "species mass must be positive");
}

inline double length_scale(double mass, double axial_frequency) {
  return std::cbrt(kConstants.coulomb_energy_length() /
                   (mass * axial_frequency * axial_frequency));
}

inline double length_scale(const ChainConfig& config) {
  validate(config);
  return length_scale(config.species.mass, config.axial_frequency);
}

struct EquilibriumOptions {
  int max_iterations = 200;
  double tolerance = 1e-12;  // max |force| in units of M wx^2 l
};

struct EquilibriumSolution {
  std::vector<double> scaled;     // in units of l, ascending
  std::vector<double> positions;  // m
  double residual = 0.0;          // max |force| / (M wx^2 l)
  int iterations = 0;
};

namespace detail {

/// Dimensionless net force on each ion: harmonic restoring term plus the
/// Coulomb push from every other ion.
inline std::vector<double> chain_forces(const std::vector<double>& u) {
  const std::size_t n = u.size();
  std::vector<double> f(n);
  for (std::size_t m = 0; m < n; ++m) {
    double s = u[m];
    for (std::size_t k = 0; k < n; ++k) {
      if (k == m) continue;
      const double d = u[m] - u[k];
      s -= (d > 0.0 ? 1.0 : -1.0) / (d * d);
    }
    f[m] = s;
  }
  return f;
}

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline bool strictly_ascending(const std::vector<double>& u) {
  for (std::size_t i = 1; i < u.size(); ++i)
    if (!(u[i] > u[i - 1])) return false;
  return true;
}

}  // namespace detail

/// Hessian of the dimensionless potential energy at positions u; the
/// dimensional coupling matrix is M wx^2 times this.
inline Matrix dimensionless_coupling_matrix(const std::vector<double>& u) {
  const std::size_t n = u.size();
  Matrix a(n, n);
  for (std::size_t m = 0; m < n; ++m) {
    double diag = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == m) continue;
      const double d = std::abs(u[m] - u[k]);
      const double c = 2.0 / (d * d * d);
      a(m, k) = -c;
      diag += c;
    }
    a(m, m) = diag;
  }
  return a;
}

/// Equilibrium positions in units of l. Damped Newton iteration from a
/// uniformly spaced start; throws ConvergenceError if the residual is still
/// above tolerance after max_iterations.
inline EquilibriumSolution scaled_equilibrium(int ion_count,
                                              const EquilibriumOptions& opts = {}) {
  detail::require(ion_count >= 1, "ion count must be at least 1");
  const auto n = static_cast<std::size_t>(ion_count);
  EquilibriumSolution sol;
  sol.scaled.assign(n, 0.0);
  if (n == 1) return sol;

  const double gap = 2.018 / std::pow(static_cast<double>(n), 0.559);
  for (std::size_t m = 0; m < n; ++m)
    sol.scaled[m] = (static_cast<double>(m) - 0.5 * static_cast<double>(n - 1)) * gap;

  auto& u = sol.scaled;
  auto f = detail::chain_forces(u);
  double res = detail::max_abs(f);
  int it = 0;
  for (; it < opts.max_iterations && res > opts.tolerance; ++it) {
    std::vector<double> rhs(n);
    for (std::size_t m = 0; m < n; ++m) rhs[m] = -f[m];
    const auto step = detail::cholesky_solve(dimensionless_coupling_matrix(u), rhs);

    double alpha = 1.0;
    std::vector<double> trial(n);
    for (int halvings = 0;; ++halvings) {
      for (std::size_t m = 0; m < n; ++m) trial[m] = u[m] + alpha * step[m];
      if (detail::strictly_ascending(trial)) {
        const double trial_res = detail::max_abs(detail::chain_forces(trial));
        if (trial_res < res || halvings >= 40) break;
      } else if (halvings >= 40) {
        throw ConvergenceError("equilibrium solve: step keeps reordering ions", res);
      }
      alpha *= 0.5;
    }
    u = trial;
    f = detail::chain_forces(u);
    res = detail::max_abs(f);
  }
  if (res > opts.tolerance)
    throw ConvergenceError("equilibrium solve did not converge in " +
                               std::to_string(opts.max_iterations) + " iterations",
                           res);

  // The exact solution is antisymmetric about the trap centre.
  for (std::size_t m = 0; m < n / 2; ++m) {
    const double x = 0.5 * (u[n - 1 - m] - u[m]);
    u[m] = -x;
    u[n - 1 - m] = x;
  }
  if (n % 2 == 1) u[n / 2] = 0.0;

  sol.residual = detail::max_abs(detail::chain_forces(u));
  sol.iterations = it;
  return sol;
}

inline EquilibriumSolution equilibrium_positions(const ChainConfig& config,
                                                 const EquilibriumOptions& opts = {}) {
  const double l = length_scale(config);
  auto sol = scaled_equilibrium(config.ion_count, opts);
  sol.positions.resize(sol.scaled.size());
  for (std::size_t m = 0; m < sol.scaled.size(); ++m)
    sol.positions[m] = sol.scaled[m] * l;
  return sol;
}

/// Dimensional coupling matrix C_nm (kg/s^2) from equilibrium positions in
/// metres.
inline Matrix coupling_matrix(const std::vector<double>& positions,
                              const ChainConfig& config) {
  const double l = length_scale(config);
  std::vector<double> u(positions.size());
  for (std::size_t m = 0; m < u.size(); ++m) u[m] = positions[m] / l;
  Matrix c = dimensionless_coupling_matrix(u);
  c *= config.species.mass * config.axial_frequency * config.axial_frequency;
  return c;
}

struct NormalModes {
  std::vector<double> frequencies;  // mu_p, in units of wx, ascending
  Matrix vectors;                   // column p is b^(p)
};

/// Normal modes of a coupling matrix expressed in units of M wx^2.
inline NormalModes normal_modes(const Matrix& dimensionless_coupling) {
  auto eig = detail::jacobi_eigen(dimensionless_coupling);
  NormalModes modes{std::vector<double>(eig.values.size()), std::move(eig.vectors)};
  for (std::size_t p = 0; p < eig.values.size(); ++p) {
    if (!(eig.values[p] > 0.0))
      throw Error("normal_modes: coupling matrix has a non-positive eigenvalue");
    modes.frequencies[p] = std::sqrt(eig.values[p]);
  }
  return modes;
}

/// s^(p)_m = b^(p)_m sqrt(N / mu_p); returned as [p][m].
inline std::vector<std::vector<double>> coupling_constants(const NormalModes& modes) {
  const std::size_t n = modes.frequencies.size();
  std::vector<std::vector<double>> s(n, std::vector<double>(n));
  for (std::size_t p = 0; p < n; ++p) {
    const double f = std::sqrt(static_cast<double>(n) / modes.frequencies[p]);
    for (std::size_t m = 0; m < n; ++m) s[p][m] = modes.vectors(m, p) * f;
  }
  return s;
}

struct ChainModel {
  ChainConfig config;
  double length_scale = 0.0;             // m
  std::vector<double> positions;         // m, ascending
  std::vector<double> scaled_positions;  // units of length_scale
  Matrix coupling_matrix;                // kg/s^2
  std::vector<double> mode_frequencies;  // units of wx, ascending
  Matrix mode_vectors;                   // column p is b^(p)
  std::vector<std::vector<double>> coupling_constants;  // [p][m]
  double force_residual = 0.0;           // units of M wx^2 l
};

inline ChainModel build_chain_model(const ChainConfig& config) {
  validate(config);
  ChainModel model;
  model.config = config;
  model.length_scale = length_scale(config);
  auto eq = equilibrium_positions(config);
  model.positions = eq.positions;
  model.scaled_positions = eq.scaled;
  model.force_residual = eq.residual;
  model.coupling_matrix = coupling_matrix(eq.positions, config);
  auto modes = normal_modes(dimensionless_coupling_matrix(eq.scaled));
  model.coupling_constants = coupling_constants(modes);
  model.mode_frequencies = std::move(modes.frequencies);
  model.mode_vectors = std::move(modes.vectors);
  return model;
}

struct MinSpacing {
  double fit = 0.0;    // l * 2.018 / N^0.559
  double exact = 0.0;  // middle gap of the solved chain
};

inline MinSpacing min_spacing(int ion_count, double axial_frequency,
                              const IonSpecies& species) {
  detail::require(ion_count >= 2, "min_spacing needs at least two ions");
  ChainConfig config{species, ion_count, axial_frequency};
  const double l = length_scale(config);
  const auto eq = scaled_equilibrium(ion_count);
  const auto mid = static_cast<std::size_t>(ion_count / 2);
  return {l * 2.018 / std::pow(static_cast<double>(ion_count), 0.559),
          l * (eq.scaled[mid] - eq.scaled[mid - 1])};
}

/// Largest chain that stays linear, floor(1.82 (wr/wx)^1.13). Equal
/// frequencies are accepted and give the single-ion answer.
inline int max_linear_ions(double radial_frequency, double axial_frequency) {
  detail::require(axial_frequency > 0.0, "axial frequency must be positive");
  detail::require(radial_frequency >= axial_frequency,
                  "radial frequency must not be below the axial frequency");
  const double n = 1.82 * std::pow(radial_frequency / axial_frequency, 1.13);
  return std::max(1, static_cast<int>(std::floor(n)));
}

}  // namespace iontrap

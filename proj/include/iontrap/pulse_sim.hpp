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

// State-vector simulation of an ion register coupled to the centre-of-mass
// phonon mode.
//
// Each ion has three internal levels {|0>, |1>, |aux>} and the CM mode is a
// Fock space truncated at `phonon_cutoff`. Basis index:
//
//   index = phonon * 3^N + sum_m level_m * 3^m
//
// so the phonon number is outermost and ion 0 is innermost.
//
// Pulse convention: a pulse with area theta and phase phi acting on a pair of
// basis states (first, second) is
//
//   [ cos(theta/2)             i e^{ i phi} sin(theta/2) ]
//   [ i e^{-i phi} sin(theta/2)   cos(theta/2)           ]
//
// with first/second = |0>/|1> (V), |0>/|aux> (V_aux), |0,1ph>/|1,0ph> (U) and
// |0,1ph>/|aux,0ph> (U_aux). U and U_aux are ideal gates: only the
// {0, 1}-phonon pair is coupled.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "iontrap/core_physics.hpp"
#include "iontrap/error.hpp"

namespace iontrap {

using Complex = std::complex<double>;

enum Level : int { kLevel0 = 0, kLevel1 = 1, kLevelAux = 2 };

class RegisterSpace {
 public:
  static constexpr std::size_t kMaxDimension = std::size_t{1} << 24;

  RegisterSpace(int ion_count, int phonon_cutoff)
      : ions_(ion_count), cutoff_(phonon_cutoff) {
    detail::require(ion_count >= 1, "register needs at least one ion");
    detail::require(phonon_cutoff >= 1, "phonon cutoff must be at least 1");
    std::size_t ion_dim = 1;
    for (int m = 0; m < ion_count; ++m) {
      ion_dim *= 3;
      detail::require(ion_dim <= kMaxDimension, "register too large");
    }
    ion_dim_ = ion_dim;
    detail::require(ion_dim_ * static_cast<std::size_t>(cutoff_ + 1) <= kMaxDimension,
                    "register too large");
  }

  int ion_count() const { return ions_; }
  int phonon_cutoff() const { return cutoff_; }
  std::size_t dimension() const { return ion_dim_ * static_cast<std::size_t>(cutoff_ + 1); }
  /// 3^N: the index distance between neighbouring phonon numbers.
  std::size_t phonon_stride() const { return ion_dim_; }

  std::size_t level_stride(int ion) const {
    std::size_t s = 1;
    for (int m = 0; m < ion; ++m) s *= 3;
    return s;
  }

  int level(std::size_t index, int ion) const {
    return static_cast<int>((index % ion_dim_) / level_stride(ion) % 3);
  }
  int phonon(std::size_t index) const { return static_cast<int>(index / ion_dim_); }

  std::size_t index(const std::vector<int>& levels, int phonon) const {
    detail::require(static_cast<int>(levels.size()) == ions_,
                    "level list must name every ion");
    detail::require(phonon >= 0 && phonon <= cutoff_, "phonon number out of range");
    std::size_t idx = static_cast<std::size_t>(phonon) * ion_dim_;
    std::size_t stride = 1;
    for (int m = 0; m < ions_; ++m) {
      detail::require(levels[m] >= 0 && levels[m] <= 2, "ion level out of range");
      idx += static_cast<std::size_t>(levels[m]) * stride;
      stride *= 3;
    }
    return idx;
  }

  void check_ion(int ion) const {
    if (ion < 0 || ion >= ions_)
      throw InvalidArgument("ion index " + std::to_string(ion) + " out of range [0, " +
                            std::to_string(ions_) + ")");
  }

  /// Human-readable label such as "|0 1 a; 2ph>" (ion 0 first).
  std::string label(std::size_t index) const {
    std::string s = "|";
    for (int m = 0; m < ions_; ++m) {
      const int l = level(index, m);
      s += l == kLevelAux ? 'a' : static_cast<char>('0' + l);
    }
    return s + ";" + std::to_string(phonon(index)) + "ph>";
  }

  bool operator==(const RegisterSpace&) const = default;

 private:
  int ions_;
  int cutoff_;
  std::size_t ion_dim_ = 1;
};

class StateVector {
 public:
  explicit StateVector(RegisterSpace space)
      : space_(space), amps_(space.dimension(), Complex{}) {
    amps_[0] = 1.0;
  }

  StateVector(RegisterSpace space, std::vector<Complex> amplitudes)
      : space_(space), amps_(std::move(amplitudes)) {
    detail::require(amps_.size() == space_.dimension(),
                    "amplitude count does not match register dimension");
  }

  /// Product basis state; levels[m] is the level of ion m.
  static StateVector basis(RegisterSpace space, const std::vector<int>& levels,
                           int phonon = 0) {
    StateVector s(space, std::vector<Complex>(space.dimension()));
    s.amps_[space.index(levels, phonon)] = 1.0;
    return s;
  }

  const RegisterSpace& space() const { return space_; }
  std::size_t size() const { return amps_.size(); }
  Complex& operator[](std::size_t i) { return amps_[i]; }
  const Complex& operator[](std::size_t i) const { return amps_[i]; }
  const std::vector<Complex>& amplitudes() const { return amps_; }
  std::vector<Complex>& amplitudes() { return amps_; }

  double norm() const {
    double s = 0.0;
    for (const auto& a : amps_) s += std::norm(a);
    return std::sqrt(s);
  }

  void normalize() {
    const double n = norm();
    detail::require(n > 0.0, "cannot normalize the zero vector");
    for (auto& a : amps_) a /= n;
  }

  /// Total probability in basis states with more than `phonon` phonons.
  double population_above_phonon(int phonon) const {
    double p = 0.0;
    for (std::size_t i = 0; i < amps_.size(); ++i)
      if (space_.phonon(i) > phonon) p += std::norm(amps_[i]);
    return p;
  }

  /// Total probability with at least one ion in |aux>.
  double aux_population() const {
    double p = 0.0;
    for (std::size_t i = 0; i < amps_.size(); ++i) {
      for (int m = 0; m < space_.ion_count(); ++m) {
        if (space_.level(i, m) == kLevelAux) {
          p += std::norm(amps_[i]);
          break;
        }
      }
    }
    return p;
  }

 private:
  RegisterSpace space_;
  std::vector<Complex> amps_;
};

inline Complex overlap(const StateVector& a, const StateVector& b) {
  detail::require(a.space() == b.space(), "states live in different registers");
  Complex s{};
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

/// |<a|b>|^2.
inline double state_fidelity(const StateVector& a, const StateVector& b) {
  return std::norm(overlap(a, b));
}

// ---------------------------------------------------------------------------
// Ideal pulses

enum class PulseKind { V, V_aux, U, U_aux };

inline std::string to_string(PulseKind k) {
  switch (k) {
    case PulseKind::V: return "V";
    case PulseKind::V_aux: return "V_aux";
    case PulseKind::U: return "U";
    case PulseKind::U_aux: return "U_aux";
  }
  return "?";
}

inline PulseKind pulse_kind_from_string(const std::string& s) {
  if (s == "V") return PulseKind::V;
  if (s == "V_aux") return PulseKind::V_aux;
  if (s == "U") return PulseKind::U;
  if (s == "U_aux") return PulseKind::U_aux;
  throw InvalidArgument("unknown pulse kind '" + s + "'");
}

struct PulseSpec {
  PulseKind kind = PulseKind::V;
  int ion = 0;
  double theta = 0.0;
  double phi = 0.0;
};

namespace detail {

/// Rotates every pair (first, second) where `first` has ion m at level
/// `first_level` with `first_phonon` phonons (any phonon number when
/// first_phonon < 0) and `second` differs only in ion m's level and phonon.
inline void rotate_pair(StateVector& psi, int ion, int first_level, int first_phonon,
                        int second_level, int second_phonon, double theta,
                        double phi) {
  const auto& sp = psi.space();
  sp.check_ion(ion);
  detail::require(theta >= 0.0, "pulse area must not be negative");
  const double c = std::cos(0.5 * theta);
  const double s = std::sin(0.5 * theta);
  const Complex upper = Complex(0.0, 1.0) * std::polar(1.0, phi) * s;
  const Complex lower = Complex(0.0, 1.0) * std::polar(1.0, -phi) * s;

  const std::size_t stride = sp.level_stride(ion);
  const std::size_t pstride = sp.phonon_stride();
  const bool all_phonons = first_phonon < 0;
  if (!all_phonons && (std::max(first_phonon, second_phonon) > sp.phonon_cutoff()))
    return;

  for (std::size_t i = 0; i < psi.size(); ++i) {
    if (sp.level(i, ion) != first_level) continue;
    const int n = sp.phonon(i);
    if (!all_phonons && n != first_phonon) continue;
    const int n2 = all_phonons ? n : second_phonon;
    const std::size_t j = i - static_cast<std::size_t>(first_level) * stride +
                          static_cast<std::size_t>(second_level) * stride -
                          static_cast<std::size_t>(n) * pstride +
                          static_cast<std::size_t>(n2) * pstride;
    const Complex a = psi[i];
    const Complex b = psi[j];
    psi[i] = c * a + upper * b;
    psi[j] = lower * a + c * b;
  }
}

}  // namespace detail

/// Carrier rotation V_m(theta, phi) on {|0>, |1>} of ion m.
inline StateVector apply_v(StateVector psi, int ion, double theta, double phi) {
  detail::rotate_pair(psi, ion, kLevel0, -1, kLevel1, -1, theta, phi);
  return psi;
}

/// Carrier rotation on {|0>, |aux>} of ion m; |1> untouched.
inline StateVector apply_v_aux(StateVector psi, int ion, double theta, double phi) {
  detail::rotate_pair(psi, ion, kLevel0, -1, kLevelAux, -1, theta, phi);
  return psi;
}

/// Red-sideband rotation on {|0>_m|1ph>, |1>_m|0ph>}.
inline StateVector apply_u(StateVector psi, int ion, double theta, double phi) {
  detail::rotate_pair(psi, ion, kLevel0, 1, kLevel1, 0, theta, phi);
  return psi;
}

/// Red-sideband rotation on {|0>_m|1ph>, |aux>_m|0ph>}.
inline StateVector apply_u_aux(StateVector psi, int ion, double theta, double phi) {
  detail::rotate_pair(psi, ion, kLevel0, 1, kLevelAux, 0, theta, phi);
  return psi;
}

inline StateVector apply_pulse(StateVector psi, const PulseSpec& p) {
  switch (p.kind) {
    case PulseKind::V: return apply_v(std::move(psi), p.ion, p.theta, p.phi);
    case PulseKind::V_aux: return apply_v_aux(std::move(psi), p.ion, p.theta, p.phi);
    case PulseKind::U: return apply_u(std::move(psi), p.ion, p.theta, p.phi);
    case PulseKind::U_aux: return apply_u_aux(std::move(psi), p.ion, p.theta, p.phi);
  }
  throw InvalidArgument("unknown pulse kind");
}

/// Applies pulses in list order (first element acts first).
inline StateVector apply_sequence(StateVector psi, const std::vector<PulseSpec>& seq) {
  for (const auto& p : seq) psi = apply_pulse(std::move(psi), p);
  return psi;
}

// ---------------------------------------------------------------------------
// Composite gates

/// R = V_aux(2pi, pi/2) V(3pi/2, pi/2) in application order.
inline std::vector<PulseSpec> hadamard_sequence(int ion) {
  return {{PulseKind::V, ion, 1.5 * kPi, 0.5 * kPi},
          {PulseKind::V_aux, ion, 2.0 * kPi, 0.5 * kPi}};
}

/// Single-qubit Hadamard on ion m: |0> -> (|0>+|1>)/sqrt2,
/// |1> -> (|0>-|1>)/sqrt2.
inline StateVector hadamard(StateVector psi, int ion) {
  return apply_sequence(std::move(psi), hadamard_sequence(ion));
}

/// The two-pulse composition V_aux(2pi, pi/2) V(pi/2, pi/2), often offered as a NOT.
/// Its action on {|0>, |1>} is the reflection (1/sqrt2)[[-1, 1], [1, 1]],
/// not a bit flip; bit_flip() is the working NOT.
inline std::vector<PulseSpec> not_composite_sequence(int ion) {
  return {{PulseKind::V, ion, 0.5 * kPi, 0.5 * kPi},
          {PulseKind::V_aux, ion, 2.0 * kPi, 0.5 * kPi}};
}

inline StateVector not_composite(StateVector psi, int ion) {
  return apply_sequence(std::move(psi), not_composite_sequence(ion));
}

/// Exact NOT: V(pi, pi/2) gives |0> -> |1>, |1> -> -|0>, and the
/// V_aux(2pi) sign flip of |0> removes the minus sign.
inline std::vector<PulseSpec> bit_flip_sequence(int ion) {
  return {{PulseKind::V, ion, kPi, 0.5 * kPi},
          {PulseKind::V_aux, ion, 2.0 * kPi, 0.5 * kPi}};
}

inline StateVector bit_flip(StateVector psi, int ion) {
  return apply_sequence(std::move(psi), bit_flip_sequence(ion));
}

/// Five-pulse CNOT through the CM phonon bus, in application order:
///   V_t(pi/2, -pi/2), U_c(pi, 0), U_aux_t(2pi, 0), U_c(pi, 0), V_t(pi/2, pi/2).
/// The three middle pulses form a controlled-Z; the outer pair conjugates it
/// into a controlled-NOT with no residual phase.
inline std::vector<PulseSpec> cnot_sequence(int control, int target) {
  detail::require(control != target, "CNOT control and target must differ");
  return {{PulseKind::V, target, 0.5 * kPi, -0.5 * kPi},
          {PulseKind::U, control, kPi, 0.0},
          {PulseKind::U_aux, target, 2.0 * kPi, 0.0},
          {PulseKind::U, control, kPi, 0.0},
          {PulseKind::V, target, 0.5 * kPi, 0.5 * kPi}};
}

/// The sequence with V_t(pi/2, pi/2) at both ends. Because the two
/// outer pulses then add up to V_t(pi, pi/2), it flips the target when the
/// control is |0> and applies a Z when the control is |1>.
inline std::vector<PulseSpec> cnot_verbatim_sequence(int control, int target) {
  detail::require(control != target, "CNOT control and target must differ");
  return {{PulseKind::V, target, 0.5 * kPi, 0.5 * kPi},
          {PulseKind::U, control, kPi, 0.0},
          {PulseKind::U_aux, target, 2.0 * kPi, 0.0},
          {PulseKind::U, control, kPi, 0.0},
          {PulseKind::V, target, 0.5 * kPi, 0.5 * kPi}};
}

inline void require_phonon_ground(const StateVector& psi) {
  if (psi.population_above_phonon(0) > 1e-10)
    throw InvalidArgument("the CM phonon mode must start in |0> for a bus gate");
}

inline StateVector cnot(StateVector psi, int control, int target) {
  psi.space().check_ion(control);
  psi.space().check_ion(target);
  require_phonon_ground(psi);
  return apply_sequence(std::move(psi), cnot_sequence(control, target));
}

inline StateVector cnot_verbatim(StateVector psi, int control, int target) {
  psi.space().check_ion(control);
  psi.space().check_ion(target);
  require_phonon_ground(psi);
  return apply_sequence(std::move(psi), cnot_verbatim_sequence(control, target));
}

// ---------------------------------------------------------------------------
// Gate extraction on the computational subspace

/// Square complex matrix, row-major.
struct GateMatrix {
  std::size_t dim = 0;
  std::vector<Complex> data;
  /// Probability each basis input leaves the computational subspace
  /// (aux levels or phonons).
  std::vector<double> leakage;

  Complex operator()(std::size_t r, std::size_t c) const { return data[r * dim + c]; }
};

/// Matrix of `op` restricted to the computational subspace of `qubits`
/// (levels {0, 1}, zero phonons, every other ion in |0>). Row/column index is
/// the bit string over `qubits` with qubits[0] most significant.
inline GateMatrix extract_gate(const RegisterSpace& space, const std::vector<int>& qubits,
                               const std::function<StateVector(StateVector)>& op) {
  const std::size_t k = qubits.size();
  const std::size_t dim = std::size_t{1} << k;
  auto index_of = [&](std::size_t bits) {
    std::vector<int> levels(space.ion_count(), kLevel0);
    for (std::size_t q = 0; q < k; ++q)
      levels[qubits[q]] = static_cast<int>((bits >> (k - 1 - q)) & 1U);
    return space.index(levels, 0);
  };
  GateMatrix g{dim, std::vector<Complex>(dim * dim), std::vector<double>(dim)};
  for (std::size_t col = 0; col < dim; ++col) {
    StateVector in(space, std::vector<Complex>(space.dimension()));
    in[index_of(col)] = 1.0;
    const StateVector out = op(std::move(in));
    double inside = 0.0;
    for (std::size_t row = 0; row < dim; ++row) {
      const Complex a = out[index_of(row)];
      g.data[row * dim + col] = a;
      inside += std::norm(a);
    }
    g.leakage[col] = std::max(0.0, 1.0 - inside);
  }
  return g;
}

inline GateMatrix cnot_truth_table() {
  GateMatrix g{4, std::vector<Complex>(16), std::vector<double>(4)};
  const int map[4] = {0, 1, 3, 2};
  for (int c = 0; c < 4; ++c) g.data[map[c] * 4 + c] = 1.0;
  return g;
}

/// |tr(E^dagger A)| / dim: one for equality up to a single global phase.
inline double phase_insensitive_fidelity(const GateMatrix& expected,
                                         const GateMatrix& actual) {
  detail::require(expected.dim == actual.dim, "gate dimensions differ");
  Complex tr{};
  for (std::size_t i = 0; i < expected.data.size(); ++i)
    tr += std::conj(expected.data[i]) * actual.data[i];
  return std::abs(tr) / static_cast<double>(expected.dim);
}

/// max over basis inputs of 1 - |<expected col|actual col>|; ignores the
/// phase of each column separately.
inline double max_column_infidelity(const GateMatrix& expected, const GateMatrix& actual) {
  detail::require(expected.dim == actual.dim, "gate dimensions differ");
  double worst = 0.0;
  for (std::size_t c = 0; c < expected.dim; ++c) {
    Complex s{};
    for (std::size_t r = 0; r < expected.dim; ++r)
      s += std::conj(expected(r, c)) * actual(r, c);
    worst = std::max(worst, 1.0 - std::abs(s));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Full-Hamiltonian evolution

/// Laser drive on one ion. The interaction-picture coupling is
///   H/hbar = (i/2) e^{i Delta t} |0><1| [g0 + g1 (a e^{-i wx t} - a^dag e^{i wx t})] + h.c.
/// with g0 = i Omega_0 e^{i phi} and g1 = i Omega_1 e^{i phi}. On resonance
/// (Delta = 0, Omega_1 = 0) a pulse of area theta equals V(theta, phi); with
/// Delta = -wx the resonant sideband realizes U(theta', phi + pi).
struct HamiltonianParams {
  double rabi_zero = 0.0;  // Omega_0, rad/s
  double rabi_one = 0.0;   // Omega_1, rad/s
  double detuning = 0.0;   // Delta, rad/s
  double axial_frequency = 0.0;  // rad/s
  int ion = 0;
  double phase = 0.0;  // phi
};

struct EvolutionOptions {
  double tolerance = 1e-8;  // bound on the estimated state error
  /// Upper bound on the step as a fraction of the fastest period in play.
  double max_step_fraction = 1.0 / 40.0;
  std::size_t max_steps = std::size_t{1} << 27;
};

struct EvolutionResult {
  StateVector state;
  std::size_t steps = 0;
  double step = 0.0;
  double error_estimate = 0.0;  // Richardson estimate of the state error
  double norm_drift = 0.0;
};

namespace detail {

class SidebandDrive {
 public:
  SidebandDrive(const RegisterSpace& space, const HamiltonianParams& p)
      : p_(p), cutoff_(space.phonon_cutoff()), pstride_(space.phonon_stride()) {
    space.check_ion(p.ion);
    stride_ = space.level_stride(p.ion);
    for (std::size_t i = 0; i < space.phonon_stride(); ++i)
      if (space.level(i, p.ion) == kLevel0) bases_.push_back(i);
    const Complex eiphi = std::polar(1.0, p.phase);
    g0_ = Complex(0.0, p.rabi_zero) * eiphi;
    g1_ = Complex(0.0, p.rabi_one) * eiphi;
    for (int n = 0; n <= cutoff_ + 1; ++n) sqrt_.push_back(std::sqrt(static_cast<double>(n)));
  }

  void derivative(double t, const std::vector<Complex>& psi, std::vector<Complex>& out) const {
    std::fill(out.begin(), out.end(), Complex{});
    const Complex carrier = std::polar(1.0, p_.detuning * t);
    const Complex lower = std::polar(1.0, -p_.axial_frequency * t);  // e^{-i wx t}
    const Complex raise = std::conj(lower);
    const Complex k0 = 0.5 * carrier * g0_;
    const Complex k1_low = 0.5 * carrier * g1_ * lower;
    const Complex k1_raise = 0.5 * carrier * g1_ * raise;
    const Complex h0 = std::conj(k0);
    const Complex h1_low = std::conj(k1_low);
    const Complex h1_raise = std::conj(k1_raise);
    for (std::size_t b : bases_) {
      for (int n = 0; n <= cutoff_; ++n) {
        const std::size_t i0 = b + static_cast<std::size_t>(n) * pstride_;
        const std::size_t i1 = i0 + stride_;
        // d psi0(n) = 1/2 (K psi1)(n)
        Complex d0 = k0 * psi[i1];
        if (n < cutoff_) d0 += k1_low * sqrt_[n + 1] * psi[i1 + pstride_];
        if (n > 0) d0 -= k1_raise * sqrt_[n] * psi[i1 - pstride_];
        // d psi1(n) = -1/2 (K^dag psi0)(n)
        Complex d1 = h0 * psi[i0];
        if (n > 0) d1 += h1_low * sqrt_[n] * psi[i0 - pstride_];
        if (n < cutoff_) d1 -= h1_raise * sqrt_[n + 1] * psi[i0 + pstride_];
        out[i0] = d0;
        out[i1] = -d1;
      }
    }
  }

 private:
  HamiltonianParams p_;
  int cutoff_;
  std::size_t pstride_;
  std::size_t stride_ = 1;
  std::vector<std::size_t> bases_;
  Complex g0_, g1_;
  std::vector<double> sqrt_;
};

inline std::vector<Complex> rk4_integrate(const SidebandDrive& drive,
                                          std::vector<Complex> psi, double duration,
                                          std::size_t steps) {
  const std::size_t n = psi.size();
  std::vector<Complex> k1(n), k2(n), k3(n), k4(n), tmp(n);
  const double h = duration / static_cast<double>(steps);
  for (std::size_t s = 0; s < steps; ++s) {
    const double t = h * static_cast<double>(s);
    drive.derivative(t, psi, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = psi[i] + 0.5 * h * k1[i];
    drive.derivative(t + 0.5 * h, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = psi[i] + 0.5 * h * k2[i];
    drive.derivative(t + 0.5 * h, tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = psi[i] + h * k3[i];
    drive.derivative(t + h, tmp, k4);
    for (std::size_t i = 0; i < n; ++i)
      psi[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return psi;
}

inline double distance(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace detail

/// Integrates the driven ion-phonon Schroedinger equation over `duration`
/// (starting at t = 0) with fixed-step RK4. The step count is doubled until
/// the Richardson estimate |psi_h - psi_{h/2}| / 15 is below the tolerance.
inline EvolutionResult evolve_exact(const StateVector& psi, const HamiltonianParams& params,
                                    double duration, const EvolutionOptions& opts = {}) {
  detail::require(duration >= 0.0, "duration must not be negative");
  detail::require(params.axial_frequency > 0.0, "axial frequency must be positive");
  detail::require(opts.tolerance > 0.0, "tolerance must be positive");
  const auto& space = psi.space();
  const detail::SidebandDrive drive(space, params);
  if (duration == 0.0) return {psi, 0, 0.0, 0.0, std::abs(psi.norm() - 1.0)};

  double fastest = params.axial_frequency;
  fastest = std::max(fastest, std::abs(params.detuning));
  fastest = std::max(fastest, std::abs(params.rabi_zero));
  fastest = std::max(fastest, std::abs(params.rabi_one) *
                                  std::sqrt(static_cast<double>(space.phonon_cutoff())));
  fastest = std::max(fastest, std::abs(params.detuning) + params.axial_frequency);
  const double h_max = opts.max_step_fraction * kTwoPi / fastest;
  std::size_t steps = static_cast<std::size_t>(std::ceil(duration / h_max));
  steps = std::max<std::size_t>(steps, 1);

  auto coarse = detail::rk4_integrate(drive, psi.amplitudes(), duration, steps);
  for (;;) {
    if (2 * steps > opts.max_steps)
      throw ConvergenceError("evolve_exact: step count cap reached before tolerance",
                             opts.max_steps);
    auto fine = detail::rk4_integrate(drive, psi.amplitudes(), duration, 2 * steps);
    const double err = detail::distance(coarse, fine) / 15.0;
    steps *= 2;
    if (err <= opts.tolerance) {
      StateVector out(space, std::move(fine));
      const double drift = std::abs(out.norm() - psi.norm());
      return {std::move(out), steps, duration / static_cast<double>(steps), err, drift};
    }
    coarse = std::move(fine);
  }
}

/// Setup of a single red-sideband pi pulse driven for the convergence scan.
struct SidebandScanParams {
  double eta = 0.1;
  int ion_count = 1;  // enters through Omega_0 = sqrt(N) Omega_1 / eta
  double axial_frequency = kTwoPi * 500e3;
  bool standing_wave = false;  // ion at a carrier node: Omega_0 = 0
  int phonon_cutoff = 3;
  double tolerance = 1e-10;
};

struct SidebandScanPoint {
  double t_u = 0.0;  // s
  double infidelity = 0.0;
};

/// Drives |1>|0ph> with a U-type pi pulse of duration t_u through the full
/// Hamiltonian and returns 1 - |<U(pi) psi0 | psi(t_u)>|^2.
inline SidebandScanPoint sideband_pi_pulse(const SidebandScanParams& p, double t_u) {
  detail::require(t_u > 0.0, "pulse duration must be positive");
  detail::require(p.eta > 0.0, "eta must be positive");
  const RegisterSpace space(1, p.phonon_cutoff);
  const auto psi0 = StateVector::basis(space, {kLevel1}, 0);
  HamiltonianParams h;
  h.rabi_one = kPi / t_u;
  h.rabi_zero = p.standing_wave
                    ? 0.0
                    : std::sqrt(static_cast<double>(p.ion_count)) * h.rabi_one / p.eta;
  h.detuning = -p.axial_frequency;
  h.axial_frequency = p.axial_frequency;
  EvolutionOptions opts;
  opts.tolerance = p.tolerance;
  const auto result = evolve_exact(psi0, h, t_u, opts);
  const auto expected = apply_u(psi0, 0, kPi, h.phase + kPi);
  return {t_u, std::max(0.0, 1.0 - state_fidelity(expected, result.state))};
}

/// Log-spaced scan of sideband pi-pulse infidelity. Durations are rounded to
/// whole trap periods so every point ends at the same phase of the
/// off-resonant terms.
inline std::vector<SidebandScanPoint> sideband_scan(const SidebandScanParams& p,
                                                    double t_min, double t_max,
                                                    int points) {
  detail::require(t_min > 0.0 && t_max > t_min, "scan range must be 0 < min < max");
  detail::require(points >= 2, "scan needs at least two points");
  const double period = kTwoPi / p.axial_frequency;
  std::vector<SidebandScanPoint> out;
  for (int i = 0; i < points; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(points - 1);
    double t = t_min * std::pow(t_max / t_min, f);
    t = std::max(1.0, std::round(t / period)) * period;
    out.push_back(sideband_pi_pulse(p, t));
  }
  return out;
}

/// Least-squares slope of log(infidelity) against log(t_u).
inline double log_log_slope(const std::vector<SidebandScanPoint>& pts) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(pts.size());
  for (const auto& p : pts) {
    const double x = std::log(p.t_u), y = std::log(p.infidelity);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// ---------------------------------------------------------------------------
// Readout

/// Seeded uniform doubles in [0, 1) built directly from mt19937_64 output so
/// sequences are identical across standard libraries.
class SeededUniform {
 public:
  explicit SeededUniform(std::uint64_t seed) : engine_(seed) {}
  double operator()() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

struct MeasurementOutcome {
  /// Character m is ion m: '0' bright (|0>), '1' dark (|1> or |aux>).
  std::string bits;
  StateVector collapsed;
  double aux_population = 0.0;
  bool aux_flag = false;
};

inline constexpr double kAuxLeakageThreshold = 1e-6;

namespace detail {

inline std::string bright_dark_pattern(const RegisterSpace& sp, std::size_t index) {
  std::string bits(static_cast<std::size_t>(sp.ion_count()), '0');
  for (int m = 0; m < sp.ion_count(); ++m)
    if (sp.level(index, m) != kLevel0) bits[static_cast<std::size_t>(m)] = '1';
  return bits;
}

inline std::size_t sample_index(const StateVector& psi, double u) {
  double total = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) total += std::norm(psi[i]);
  const double target = u * total;
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double p = std::norm(psi[i]);
    if (p == 0.0) continue;
    acc += p;
    last = i;
    if (target < acc) return i;
  }
  return last;
}

}  // namespace detail

/// Projective fluorescence readout of every ion, sampled with `rng`.
inline MeasurementOutcome measure(const StateVector& psi, SeededUniform& rng) {
  MeasurementOutcome out{"", psi, psi.aux_population(), false};
  out.aux_flag = out.aux_population > kAuxLeakageThreshold;
  const auto& sp = psi.space();
  out.bits = detail::bright_dark_pattern(sp, detail::sample_index(psi, rng()));
  for (std::size_t i = 0; i < out.collapsed.size(); ++i)
    if (detail::bright_dark_pattern(sp, i) != out.bits) out.collapsed[i] = 0.0;
  out.collapsed.normalize();
  return out;
}

inline MeasurementOutcome measure(const StateVector& psi, std::uint64_t seed) {
  SeededUniform rng(seed);
  return measure(psi, rng);
}

/// Outcome histogram over `shots` independent readouts of the same state.
inline std::map<std::string, std::size_t> sample_counts(const StateVector& psi,
                                                        std::size_t shots,
                                                        std::uint64_t seed) {
  SeededUniform rng(seed);
  std::vector<double> cumulative(psi.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) cumulative[i] = acc += std::norm(psi[i]);
  std::map<std::string, std::size_t> counts;
  for (std::size_t s = 0; s < shots; ++s) {
    const double target = rng() * acc;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    auto idx = static_cast<std::size_t>(std::min<std::ptrdiff_t>(
        it - cumulative.begin(), static_cast<std::ptrdiff_t>(psi.size()) - 1));
    ++counts[detail::bright_dark_pattern(psi.space(), idx)];
  }
  return counts;
}

}  // namespace iontrap

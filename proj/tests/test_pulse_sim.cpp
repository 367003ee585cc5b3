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

#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "iontrap/pulse_sim.hpp"

using namespace iontrap;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

using Dense = std::vector<std::vector<Complex>>;
const Complex I(0.0, 1.0);

// Basis index computed independently of RegisterSpace.
std::size_t idx(int n_ions, const std::vector<int>& levels, int phonon) {
  std::size_t i = 0, p = 1;
  for (int m = 0; m < n_ions; ++m, p *= 3) i += static_cast<std::size_t>(levels[m]) * p;
  return i + static_cast<std::size_t>(phonon) * p;
}

std::vector<int> levels_of(int n_ions, std::size_t i) {
  std::vector<int> l(n_ions);
  for (int m = 0; m < n_ions; ++m, i /= 3) l[m] = static_cast<int>(i % 3);
  return l;
}

// Dense matrix of one ideal pulse, from the two-level formula.
Dense pulse_matrix(int n_ions, int cutoff, PulseKind kind, int ion, double th, double ph) {
  std::size_t ion_dim = 1;
  for (int m = 0; m < n_ions; ++m) ion_dim *= 3;
  const std::size_t dim = ion_dim * static_cast<std::size_t>(cutoff + 1);
  Dense u(dim, std::vector<Complex>(dim));
  for (std::size_t i = 0; i < dim; ++i) u[i][i] = 1.0;
  const double c = std::cos(th / 2), s = std::sin(th / 2);
  for (std::size_t i = 0; i < ion_dim; ++i) {
    auto lv = levels_of(n_ions, i);
    if (lv[ion] != 0) continue;
    auto second = lv;
    for (int n = 0; n <= cutoff; ++n) {
      int n1 = n, n2 = n;
      switch (kind) {
        case PulseKind::V: second[ion] = 1; break;
        case PulseKind::V_aux: second[ion] = 2; break;
        case PulseKind::U: second[ion] = 1; n1 = 1; n2 = 0; break;
        case PulseKind::U_aux: second[ion] = 2; n1 = 1; n2 = 0; break;
      }
      if ((kind == PulseKind::U || kind == PulseKind::U_aux) && n != 0) continue;
      const std::size_t a = idx(n_ions, lv, n1), b = idx(n_ions, second, n2);
      u[a][a] = c;
      u[b][b] = c;
      u[a][b] = I * std::polar(1.0, ph) * s;
      u[b][a] = I * std::polar(1.0, -ph) * s;
    }
  }
  return u;
}

Dense mul(const Dense& a, const Dense& b) {
  const std::size_t n = a.size();
  Dense c(n, std::vector<Complex>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      if (a[i][k] != Complex{})
        for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

Dense sequence_matrix(int n_ions, int cutoff, const std::vector<PulseSpec>& seq) {
  Dense u = pulse_matrix(n_ions, cutoff, PulseKind::V, 0, 0.0, 0.0);
  for (const auto& p : seq) u = mul(pulse_matrix(n_ions, cutoff, p.kind, p.ion, p.theta, p.phi), u);
  return u;
}

std::vector<Complex> apply_dense(const Dense& u, const std::vector<Complex>& v) {
  std::vector<Complex> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) out[i] += u[i][j] * v[j];
  return out;
}

StateVector random_state(const RegisterSpace& sp, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> nd;
  std::vector<Complex> a(sp.dimension());
  for (auto& x : a) x = Complex(nd(g), nd(g));
  StateVector s(sp, a);
  s.normalize();
  return s;
}

double max_diff(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("register space layout", "[pulse]") {
  const RegisterSpace sp(3, 2);
  CHECK(sp.dimension() == 27 * 3);
  CHECK(sp.phonon_stride() == 27);
  for (std::size_t i = 0; i < sp.dimension(); ++i) {
    const auto lv = levels_of(3, i % 27);
    CHECK(sp.index(lv, sp.phonon(i)) == i);
    CHECK(idx(3, lv, sp.phonon(i)) == i);
    for (int m = 0; m < 3; ++m) CHECK(sp.level(i, m) == lv[m]);
  }
  CHECK(sp.label(sp.index({0, 1, 2}, 1)) == "|01a;1ph>");
  CHECK_THROWS_AS(RegisterSpace(0, 1), InvalidArgument);
  CHECK_THROWS_AS(RegisterSpace(2, 0), InvalidArgument);
  CHECK_THROWS_AS(RegisterSpace(16, 1), InvalidArgument);
  CHECK_THROWS_AS(sp.check_ion(3), InvalidArgument);
  CHECK_THROWS_AS(apply_v(StateVector(sp), 5, 1.0, 0.0), InvalidArgument);
}

TEST_CASE("ideal pulses match the dense oracle", "[pulse][oracle]") {
  const RegisterSpace sp(2, 2);
  const auto psi = random_state(sp, 11);
  for (auto kind : {PulseKind::V, PulseKind::V_aux, PulseKind::U, PulseKind::U_aux})
    for (int ion : {0, 1})
      for (double th : {0.3, kPi, 2 * kPi, 5.1})
        for (double ph : {0.0, 0.7, -kPi / 2}) {
          INFO(to_string(kind) << " ion " << ion << " theta " << th << " phi " << ph);
          const auto out = apply_pulse(psi, {kind, ion, th, ph});
          const auto ref = apply_dense(pulse_matrix(2, 2, kind, ion, th, ph), psi.amplitudes());
          CHECK(max_diff(out.amplitudes(), ref) < 1e-14);
          CHECK_THAT(out.norm(), WithinAbs(1.0, 1e-12));
        }
}

TEST_CASE("carrier pulse examples", "[pulse]") {
  const RegisterSpace sp(1, 1);
  const auto zero = StateVector::basis(sp, {0});
  const auto one = StateVector::basis(sp, {1});
  const auto aux = StateVector::basis(sp, {2});
  auto a = apply_v(zero, 0, kPi, kPi / 2);
  CHECK(std::abs(a[sp.index({1}, 0)] - Complex(1.0, 0.0)) < 1e-15);
  auto b = apply_v(one, 0, kPi, kPi / 2);
  CHECK(std::abs(b[sp.index({0}, 0)] - Complex(-1.0, 0.0)) < 1e-15);

  const auto psi = random_state(sp, 3);
  for (double ph : {0.0, 0.4, 2.0}) {
    CHECK(max_diff(apply_v(psi, 0, 4 * kPi, ph).amplitudes(), psi.amplitudes()) < 1e-14);
    const auto two = apply_v(psi, 0, 2 * kPi, ph);
    for (std::size_t i = 0; i < psi.size(); ++i) {
      const Complex expected = sp.level(i, 0) == kLevelAux ? psi[i] : -psi[i];
      CHECK(std::abs(two[i] - expected) < 1e-14);
    }
  }

  const auto v2 = apply_v_aux(psi, 0, 2 * kPi, kPi / 2);
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const Complex expected = sp.level(i, 0) == kLevel1 ? psi[i] : -psi[i];
    CHECK(std::abs(v2[i] - expected) < 1e-14);
  }
  CHECK(max_diff(apply_v_aux(psi, 0, 0.0, 1.3).amplitudes(), psi.amplitudes()) == 0.0);
  CHECK(std::abs(apply_v_aux(zero, 0, kPi, kPi / 2)[sp.index({2}, 0)] - Complex(1.0, 0.0)) < 1e-15);
  CHECK(state_fidelity(apply_v_aux(zero, 0, kPi, kPi / 2), aux) > 1 - 1e-15);
  CHECK(state_fidelity(apply_v_aux(one, 0, kPi, 0.0), one) == 1.0);
}

TEST_CASE("sideband pulse examples", "[pulse]") {
  const RegisterSpace sp(1, 3);
  const auto one0 = StateVector::basis(sp, {1}, 0);
  const auto u = apply_u(one0, 0, kPi, 0.0);
  CHECK(std::abs(u[sp.index({0}, 1)] - I) < 1e-15);
  const auto ground = StateVector::basis(sp, {0}, 0);
  for (double th : {0.5, kPi, 3.0})
    CHECK(max_diff(apply_u(ground, 0, th, 0.9).amplitudes(), ground.amplitudes()) == 0.0);
  const auto psi = random_state(sp, 5);
  const auto u2 = apply_u(psi, 0, 2 * kPi, 0.0);
  const std::size_t a = sp.index({0}, 1), b = sp.index({1}, 0);
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const Complex expected = (i == a || i == b) ? -psi[i] : psi[i];
    CHECK(std::abs(u2[i] - expected) < 1e-14);
  }

  const auto zero1 = StateVector::basis(sp, {0}, 1);
  CHECK(std::abs(apply_u_aux(zero1, 0, 2 * kPi, 0.0)[a] - Complex(-1.0, 0.0)) < 1e-15);
  const auto ua = apply_u_aux(psi, 0, 2 * kPi, 0.0);
  for (std::size_t i = 0; i < psi.size(); ++i)
    if (sp.level(i, 0) == kLevel1) CHECK(ua[i] == psi[i]);
  CHECK(max_diff(apply_u_aux(psi, 0, 0.0, 0.4).amplitudes(), psi.amplitudes()) == 0.0);
  CHECK(std::abs(apply_u_aux(zero1, 0, kPi, 0.0)[sp.index({2}, 0)] - I) < 1e-15);
}

TEST_CASE("pulse rotations compose", "[pulse][property]") {
  const RegisterSpace sp(2, 1);
  const auto psi = random_state(sp, 9);
  for (double t1 : {0.2, 1.0, 3.3})
    for (double t2 : {0.5, 2.4})
      for (double ph : {0.0, 1.1}) {
        const auto a = apply_v(apply_v(psi, 1, t1, ph), 1, t2, ph);
        const auto b = apply_v(psi, 1, t1 + t2, ph);
        CHECK(max_diff(a.amplitudes(), b.amplitudes()) < 1e-10);
      }
  for (int seed = 0; seed < 20; ++seed) {
    auto s = random_state(sp, 100 + static_cast<std::uint64_t>(seed));
    for (auto kind : {PulseKind::V, PulseKind::V_aux, PulseKind::U, PulseKind::U_aux})
      s = apply_pulse(s, {kind, seed % 2, 0.37 * seed, 0.11 * seed});
    CHECK_THAT(s.norm(), WithinAbs(1.0, 1e-12));
  }
  CHECK_THROWS_AS(apply_v(StateVector(sp), 0, -1.0, 0.0), InvalidArgument);
}

TEST_CASE("hadamard composition", "[pulse]") {
  // 2x2 products of the two pulse matrices on {|0>, |1>}
  const double r = 1 / std::sqrt(2.0);
  const RegisterSpace sp(1, 1);
  const auto h0 = hadamard(StateVector::basis(sp, {0}), 0);
  const auto h1 = hadamard(StateVector::basis(sp, {1}), 0);
  CHECK(std::abs(h0[sp.index({0}, 0)] - r) < 1e-10);
  CHECK(std::abs(h0[sp.index({1}, 0)] - r) < 1e-10);
  CHECK(std::abs(h1[sp.index({0}, 0)] - r) < 1e-10);
  CHECK(std::abs(h1[sp.index({1}, 0)] + r) < 1e-10);
  const Dense d = sequence_matrix(1, 1, hadamard_sequence(0));
  const auto psi = random_state(sp, 2);
  CHECK(max_diff(hadamard(psi, 0).amplitudes(), apply_dense(d, psi.amplitudes())) < 1e-14);
  const auto hh = hadamard(hadamard(StateVector::basis(sp, {1}), 0), 0);
  CHECK(std::abs(hh[sp.index({1}, 0)] - 1.0) < 1e-10);
}

TEST_CASE("not composite and bit flip", "[pulse]") {
  const RegisterSpace sp(1, 1);
  const auto g = extract_gate(sp, {0}, [](StateVector s) { return not_composite(std::move(s), 0); });
  const double r = 1 / std::sqrt(2.0);
  CHECK(std::abs(g(0, 0) + r) < 1e-12);
  CHECK(std::abs(g(0, 1) - r) < 1e-12);
  CHECK(std::abs(g(1, 0) - r) < 1e-12);
  CHECK(std::abs(g(1, 1) - r) < 1e-12);
  const auto x = extract_gate(sp, {0}, [](StateVector s) { return bit_flip(std::move(s), 0); });
  CHECK(std::abs(x(0, 0)) < 1e-12);
  CHECK(std::abs(x(1, 0) - 1.0) < 1e-12);
  CHECK(std::abs(x(0, 1) - 1.0) < 1e-12);
  CHECK(std::abs(x(1, 1)) < 1e-12);
}

TEST_CASE("five-pulse CNOT", "[pulse]") {
  const RegisterSpace sp(2, 1);
  for (auto [c, t] : {std::pair{0, 1}, std::pair{1, 0}}) {
    INFO("control " << c << " target " << t);
    const auto g = extract_gate(sp, {c, t}, [&](StateVector s) { return cnot(std::move(s), c, t); });
    const auto expected = cnot_truth_table();
    CHECK(phase_insensitive_fidelity(expected, g) >= 1 - 1e-10);
    CHECK(max_column_infidelity(expected, g) < 1e-10);
    for (double l : g.leakage) CHECK(l < 1e-10);
    // oracle: product of the dense pulse matrices
    const Dense d = sequence_matrix(2, 1, cnot_sequence(c, t));
    const auto psi = random_state(sp, 17);
    std::vector<Complex> ground(psi.amplitudes());
    for (std::size_t i = 0; i < ground.size(); ++i)
      if (sp.phonon(i) > 0) ground[i] = 0.0;
    StateVector in(sp, ground);
    in.normalize();
    CHECK(max_diff(cnot(in, c, t).amplitudes(), apply_dense(d, in.amplitudes())) < 1e-14);
    // CNOT twice
    const auto g2 = extract_gate(sp, {c, t}, [&](StateVector s) { return cnot(cnot(std::move(s), c, t), c, t); });
    GateMatrix id{4, std::vector<Complex>(16), std::vector<double>(4)};
    for (int i = 0; i < 4; ++i) id.data[static_cast<std::size_t>(i * 5)] = 1.0;
    CHECK(phase_insensitive_fidelity(id, g2) >= 1 - 1e-10);
  }
  CHECK_THROWS_AS(cnot(StateVector(sp), 1, 1), InvalidArgument);
  CHECK_THROWS_AS(cnot(StateVector::basis(sp, {0, 0}, 1), 0, 1), InvalidArgument);
}

TEST_CASE("CNOT on a superposed control entangles", "[pulse]") {
  const RegisterSpace sp(2, 1);
  auto psi = hadamard(StateVector::basis(sp, {0, 0}), 0);
  psi = cnot(psi, 0, 1);
  CHECK_THAT(std::norm(psi[sp.index({0, 0}, 0)]), WithinAbs(0.5, 1e-12));
  CHECK_THAT(std::norm(psi[sp.index({1, 1}, 0)]), WithinAbs(0.5, 1e-12));
  CHECK(psi.population_above_phonon(0) < 1e-12);
  CHECK(psi.aux_population() < 1e-12);
}

TEST_CASE("literal sequence gives an anti-controlled flip", "[pulse]") {
  const RegisterSpace sp(2, 1);
  const auto g = extract_gate(sp, {0, 1}, [](StateVector s) { return cnot_verbatim(std::move(s), 0, 1); });
  CHECK(phase_insensitive_fidelity(cnot_truth_table(), g) < 0.75);
  CHECK_THAT(std::abs(g(1, 0)), WithinAbs(1.0, 1e-12));  // |00> -> |01>
  CHECK_THAT(std::abs(g(0, 1)), WithinAbs(1.0, 1e-12));  // |01> -> |00>
  CHECK_THAT(std::abs(g(2, 2)), WithinAbs(1.0, 1e-12));
  CHECK_THAT(std::abs(g(3, 3)), WithinAbs(1.0, 1e-12));
  // relative sign between |10> and |11> (a Z on the target)
  CHECK(std::abs(g(2, 2) + g(3, 3)) < 1e-12);
  for (double l : g.leakage) CHECK(l < 1e-12);
}

TEST_CASE("evolution without coupling is the identity", "[pulse][exact]") {
  const RegisterSpace sp(2, 3);
  const auto psi = random_state(sp, 4);
  HamiltonianParams h;
  h.axial_frequency = kTwoPi * 1e5;
  const auto r = evolve_exact(psi, h, 3e-5);
  CHECK(max_diff(r.state.amplitudes(), psi.amplitudes()) == 0.0);
  CHECK(evolve_exact(psi, h, 0.0).steps == 0);
}

TEST_CASE("drive generator is anti-Hermitian", "[pulse][exact]") {
  const RegisterSpace sp(2, 3);
  HamiltonianParams h{3e5, 4e4, -2e6, 2e6, 1, 0.7};
  const detail::SidebandDrive drive(sp, h);
  const std::size_t n = sp.dimension();
  Dense m(n, std::vector<Complex>(n));
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<Complex> e(n), out(n);
    e[j] = 1.0;
    drive.derivative(1.3e-6, e, out);
    for (std::size_t i = 0; i < n; ++i) m[i][j] = out[i];
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) worst = std::max(worst, std::abs(m[i][j] + std::conj(m[j][i])));
  CHECK(worst < 1e-9);
}

TEST_CASE("carrier drive reproduces the V pulse", "[pulse][exact]") {
  const RegisterSpace sp(2, 3);
  auto psi = random_state(sp, 8);
  for (double ph : {0.0, 0.5, kPi / 2, -2.0}) {
    HamiltonianParams h;
    h.rabi_zero = kTwoPi * 1e6;
    h.axial_frequency = kTwoPi * 500e3;
    h.ion = 1;
    h.phase = ph;
    const auto r = evolve_exact(psi, h, kPi / h.rabi_zero);
    CHECK(state_fidelity(apply_v(psi, 1, kPi, ph), r.state) > 1 - 1e-6);
    CHECK(r.norm_drift < 1e-8);
    CHECK(r.error_estimate <= 1e-8);
    const auto half = evolve_exact(psi, h, 0.5 * kPi / h.rabi_zero);
    CHECK(state_fidelity(apply_v(psi, 1, kPi / 2, ph), half.state) > 1 - 1e-6);
  }
}

TEST_CASE("norm is preserved over a million steps", "[pulse][exact]") {
  const RegisterSpace sp(1, 3);
  const auto psi = StateVector::basis(sp, {1}, 0);
  HamiltonianParams h;
  h.axial_frequency = kTwoPi * 500e3;
  h.detuning = -h.axial_frequency;
  h.rabi_one = 2e3;
  h.rabi_zero = h.rabi_one / 0.1;
  const double duration = 12500 * kTwoPi / h.axial_frequency;
  const auto r = evolve_exact(psi, h, duration);
  CHECK(r.steps >= 1'000'000);
  CHECK(r.norm_drift < 1e-8);
}

TEST_CASE("step cap is reported", "[pulse][exact]") {
  const RegisterSpace sp(1, 3);
  HamiltonianParams h{1e7, 0.0, 0.0, 1e6, 0, 0.0};
  EvolutionOptions opts;
  opts.max_steps = 64;
  opts.tolerance = 1e-14;
  CHECK_THROWS_AS(evolve_exact(StateVector::basis(sp, {1}), h, 1e-4, opts), ConvergenceError);
}

TEST_CASE("sideband pi pulse converges as the pulse lengthens", "[pulse][exact]") {
  SidebandScanParams p;
  const double bound = kPi * std::sqrt(1.0 * p.ion_count) / (p.eta * p.axial_frequency);
  p.standing_wave = true;
  CHECK(sideband_pi_pulse(p, 10 * bound).infidelity < 1e-3);
  p.standing_wave = false;
  const auto pts = sideband_scan(p, 30 * bound, 300 * bound, 4);
  CHECK(std::abs(log_log_slope(pts) + 2.0) < 0.1);
  for (std::size_t i = 1; i < pts.size(); ++i) CHECK(pts[i].infidelity < pts[i - 1].infidelity);
}

TEST_CASE("readout of eigenstates and collapse", "[pulse][readout]") {
  const RegisterSpace sp(2, 1);
  const auto s01 = StateVector::basis(sp, {0, 1});
  for (std::uint64_t seed = 0; seed < 50; ++seed) CHECK(measure(s01, seed).bits == "01");
  const auto bell = cnot(hadamard(StateVector::basis(sp, {0, 0}), 0), 0, 1);
  const auto first = measure(bell, 42);
  const auto again = measure(first.collapsed, 7);
  CHECK(again.bits == first.bits);
  CHECK_THAT(first.collapsed.norm(), WithinAbs(1.0, 1e-12));
  CHECK_FALSE(first.aux_flag);
  const auto a = measure(bell, 1234), b = measure(bell, 1234);
  CHECK(a.bits == b.bits);
  CHECK(a.collapsed.amplitudes() == b.collapsed.amplitudes());
}

TEST_CASE("bell state statistics", "[pulse][readout]") {
  const RegisterSpace sp(2, 1);
  const auto bell = cnot(hadamard(StateVector::basis(sp, {0, 0}), 0), 0, 1);
  const auto counts = sample_counts(bell, 100000, 2024);
  const double p00 = static_cast<double>(counts.count("00") ? counts.at("00") : 0) / 1e5;
  CHECK(std::abs(p00 - 0.5) < 0.01);
  CHECK(counts.count("01") == 0);
  CHECK(counts.count("10") == 0);
  CHECK(sample_counts(bell, 1000, 5) == sample_counts(bell, 1000, 5));
}

TEST_CASE("aux population is flagged and read as dark", "[pulse][readout]") {
  const RegisterSpace sp(1, 1);
  const auto aux = StateVector::basis(sp, {2});
  const auto r = measure(aux, 1);
  CHECK(r.aux_flag);
  CHECK(r.bits == "1");
  auto tiny = apply_v_aux(StateVector::basis(sp, {0}), 0, 1e-4, 0.0);
  CHECK_FALSE(measure(tiny, 1).aux_flag);
}

TEST_CASE("seeded uniform stream is fixed", "[pulse][readout]") {
  SeededUniform a(99), b(99);
  std::mt19937_64 ref(99);
  for (int i = 0; i < 100; ++i) {
    const double x = a();
    CHECK(x == static_cast<double>(ref() >> 11) * 0x1.0p-53);
    CHECK(x == b());
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
}

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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <array>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "iontrap/iontrap.hpp"

using namespace iontrap;

namespace {

using Clock = std::chrono::steady_clock;

struct Criterion {
  std::string id;
  std::string title;
  std::function<bool(std::ostringstream&)> body;
  double time_limit_s;  // 0 = untimed
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

using Mat3 = std::array<std::array<Complex, 3>, 3>;

// Carrier pulse on levels (first, second) of a single ion, as a 3x3 matrix.
Mat3 pulse3(int first, int second, double theta, double phi) {
  Mat3 m{};
  for (int i = 0; i < 3; ++i) m[i][i] = 1.0;
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  const Complex i1(0, 1);
  m[first][first] = c;
  m[second][second] = c;
  m[first][second] = i1 * std::polar(1.0, phi) * s;
  m[second][first] = i1 * std::polar(1.0, -phi) * s;
  return m;
}

Mat3 mul(const Mat3& a, const Mat3& b) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) r[i][j] += a[i][k] * b[k][j];
  return r;
}

bool within_rel(double actual, double expected, double rel) {
  return std::abs(actual - expected) <= rel * std::abs(expected);
}

std::string cli_bytes(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::dispatch(args, out, err);
  return std::to_string(code) + "\n" + out.str() + err.str();
}

std::string spawn_bytes(const std::string& args) {
  const std::string cmd = std::string(IONTRAP_CLI_PATH) + " " + args + " 2>&1";
  std::string bytes;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return "<spawn failed>";
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) bytes.append(buf, n);
  ::pclose(pipe);
  return bytes;
}

// ---------------------------------------------------------------------------

bool ac1(std::ostringstream& log) {
  const RegisterSpace space(2, 1);
  const auto expected = cnot_truth_table();
  GateMatrix id{4, std::vector<Complex>(16), {}};
  for (std::size_t i = 0; i < 4; ++i) id.data[i * 5] = 1.0;
  bool ok = true;
  for (auto [c, t] : {std::pair{0, 1}, std::pair{1, 0}}) {
    const auto g = extract_gate(space, {c, t}, [&](StateVector s) { return cnot(std::move(s), c, t); });
    const auto g2 = extract_gate(space, {c, t}, [&](StateVector s) { return cnot(cnot(std::move(s), c, t), c, t); });
    const double f = phase_insensitive_fidelity(expected, g);
    const double f2 = phase_insensitive_fidelity(id, g2);
    double leak = 0.0;
    for (double l : g.leakage) leak = std::max(leak, l);
    log << " control=" << c << " F=1-" << 1 - f << " F(CNOT^2,I)=1-" << 1 - f2 << " leakage=" << leak;
    ok = ok && f >= 1 - 1e-10 && f2 >= 1 - 1e-10 && leak < 1e-10;
  }
  return ok;
}

bool ac2(std::ostringstream& log) {
  const RegisterSpace one(1, 1);
  Mat3 product{};
  for (int i = 0; i < 3; ++i) product[i][i] = 1.0;
  for (const auto& p : hadamard_sequence(0)) {
    const int second = p.kind == PulseKind::V_aux ? kLevelAux : kLevel1;
    product = mul(pulse3(kLevel0, second, p.theta, p.phi), product);
  }
  const double r = 1 / std::sqrt(2.0);
  const Complex target[2][2] = {{r, r}, {r, -r}};  // [row][col]
  double sim_err = 0.0, mat_err = 0.0;
  for (int col = 0; col < 2; ++col) {
    const auto out = hadamard(StateVector::basis(one, {col}), 0);
    for (int row = 0; row < 3; ++row) {
      const Complex want = row < 2 ? target[row][col] : Complex{};
      sim_err = std::max(sim_err, std::abs(out[static_cast<std::size_t>(row)] - want));
      mat_err = std::max(mat_err, std::abs(product[row][col] - want));
      sim_err = std::max(sim_err, std::abs(out[static_cast<std::size_t>(row)] - product[row][col]));
    }
  }
  log << " max|sim - R|=" << sim_err << " max|matrix product - R|=" << mat_err;
  return sim_err < 1e-10 && mat_err < 1e-10;
}

bool ac3(std::ostringstream& log) {
  const auto e2 = scaled_equilibrium(2).scaled;
  const auto e3 = scaled_equilibrium(3).scaled;
  const double u2 = std::cbrt(0.25), u3 = std::cbrt(1.25);
  double pos_err = std::max({std::abs(e2[0] + u2) / u2, std::abs(e2[1] - u2) / u2,
                             std::abs(e3[0] + u3) / u3, std::abs(e3[2] - u3) / u3});
  pos_err = std::max(pos_err, std::abs(e3[1]));
  double mode_err = 0.0, s_err = 0.0;
  const auto ca = ca40_species();
  for (int n = 2; n <= 10; ++n) {
    const auto m = build_chain_model({ca, n, kTwoPi * 500e3});
    mode_err = std::max(mode_err, std::abs(m.mode_frequencies[0] - 1.0));
    const double sign = m.mode_vectors(0, 0) < 0 ? -1.0 : 1.0;
    for (int i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      mode_err = std::max(mode_err, std::abs(sign * m.mode_vectors(k, 0) - 1 / std::sqrt(1.0 * n)));
      s_err = std::max(s_err, std::abs(m.coupling_constants[0][k] - 1.0));
    }
  }
  log << " position rel err=" << pos_err << " CM mode err=" << mode_err << " s1 err=" << s_err;
  return pos_err < 1e-9 && mode_err < 1e-9 && s_err < 1e-9;
}

bool ac4(std::ostringstream& log) {
  const auto ca = ca40_species();
  const int n24 = max_linear_ions(kTwoPi * 5e6, kTwoPi * 500e3);
  const int n151 = max_linear_ions(kTwoPi * 5e6, kTwoPi * 100e3);
  const double depth = pseudopotential_depth(reference_trap(ca));
  const double xt = crosstalk(20e-6, 21.6e-6);
  const auto sp = min_spacing(2, kTwoPi * 200e3, ca);
  log << " N_max=" << n24 << "," << n151 << " depth=" << depth << " eV crosstalk=" << xt
      << " spacing fit=" << sp.fit * 1e6 << " um exact=" << sp.exact * 1e6 << " um";
  return n24 == 24 && n151 == 151 && within_rel(depth, 14.7, 0.03) && within_rel(xt, 1e-3, 0.1) &&
         within_rel(sp.fit, 20e-6, 0.25) && within_rel(sp.exact, 16.4e-6, 0.01);
}

bool ac5(std::ostringstream& log) {
  const auto ca = ca40_species();
  const double w = kTwoPi * 500e3;
  LaserParams lp;  // single laser, sin(10 deg) projection
  const double eta = lamb_dicke(ca, w, lp);
  const auto b = pulse_bounds(10, eta, w);
  LaserParams power_params;
  power_params.axial_projection = 1.0;
  const auto pw = laser_power(power_params, ca, ca.transition("S1/2-D5/2"), 10, w, 5e-6);
  const bool errors = gate_error(ErrorScheme::standing, 1) == 8.9e-6 &&
                      gate_error(ErrorScheme::traveling, 1) == 3.6e-5 &&
                      gate_error(ErrorScheme::raman, 1) == 1.3e-8;
  log << " t_V=" << b.t_v_min * 1e9 << " ns t_U(trav)=" << b.t_u_traveling_min * 1e6
      << " us t_U(stand)=" << b.t_u_standing_min * 1e6 << " us power=" << pw.power * 1e3
      << " mW derivation steps=" << pw.derivation.size();
  return within_rel(b.t_v_min, 7.5e-9, 0.05) && within_rel(b.t_u_traveling_min, 130e-6, 0.05) &&
         within_rel(b.t_u_standing_min, 2.6e-6, 0.02) && pw.power >= 12.5e-3 && pw.power <= 50e-3 &&
         pw.derivation.size() >= 4 && errors;
}

bool ac6(std::ostringstream& log) {
  SidebandScanParams p;  // eta 0.1, one ion, 500 kHz, traveling wave
  const double bound = pulse_bounds(p.ion_count, p.eta, p.axial_frequency).t_u_traveling_min;
  const auto pts = sideband_scan(p, 30 * bound, 300 * bound, 4);
  const double slope = log_log_slope(pts);

  const RegisterSpace sp(2, 2);
  std::vector<Complex> amps(sp.dimension());
  SeededUniform rng(5);
  for (auto& a : amps) a = Complex(rng() - 0.5, rng() - 0.5);
  StateVector psi(sp, amps);
  psi.normalize();
  HamiltonianParams h;
  h.rabi_zero = kTwoPi * 1e6;
  h.rabi_one = 0.0;
  h.axial_frequency = p.axial_frequency;
  h.ion = 1;
  h.phase = 0.7;
  const auto r = evolve_exact(psi, h, kPi / h.rabi_zero);
  const double f = state_fidelity(apply_v(psi, 1, kPi, h.phase), r.state);
  log << " slope over [30, 300] x bound=" << slope << " first/last infidelity=" << pts.front().infidelity
      << "/" << pts.back().infidelity << " carrier fidelity=1-" << 1 - f;
  return std::abs(slope + 2.0) <= 0.1 && 1 - f <= 1e-6;
}

bool ac7(std::ostringstream& log) {
  bool ok = true;
  for (std::uint64_t n : {15, 21}) {
    int wins = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      shor::FactoringOptions opts;
      opts.max_attempts = 10;
      const auto out = shor::factor(n, seed, opts);
      if (!out.success || out.factors.size() != 2 || out.attempts.size() > 10) continue;
      const auto p = *out.factors.begin(), q = *out.factors.rbegin();
      if (p * q == n && shor::is_prime(p) && shor::is_prime(q)) ++wins;
    }
    int quantum = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      shor::FactoringOptions opts;
      opts.max_attempts = 10;
      opts.allow_shortcut = false;
      quantum += shor::factor(n, seed, opts).success;
    }
    log << " factor(" << n << ") " << wins << "/100 (order finding only: " << quantum << "/100)";
    ok = ok && wins >= 95;
  }

  bool modexp = true;
  for (std::uint64_t n = 2; n <= 64 && modexp; ++n) {
    for (std::uint64_t x = 1; x < n && modexp; ++x) {
      if (shor::gcd(x, n) != 1) continue;
      auto reg = shor::QubitRegister::shor_layout(shor::bit_length(n));
      const auto& left = reg.segment("left");
      const auto& right = reg.segment("right");
      std::vector<Complex> tags(reg.size());
      for (std::size_t i = 0; i < tags.size(); ++i) tags[i] = static_cast<double>(i + 1);
      reg.set_amplitudes(tags);
      const double scale = std::abs(reg[0]);
      reg.mod_exp(x, n);
      std::vector<std::uint64_t> power(std::size_t{1} << left.count);  // x^z mod n by repeated multiplication
      power[0] = 1 % n;
      for (std::size_t z = 1; z < power.size(); ++z) power[z] = power[z - 1] * x % n;
      for (std::uint64_t i = 0; i < reg.size() && modexp; ++i) {
        const auto j = right.with_value(i, right.value(i) ^ power[left.value(i)]);
        modexp = std::abs(reg[j] / scale - static_cast<double>(i + 1)) < 1e-6 * static_cast<double>(i + 1);
      }
    }
  }
  log << " mod_exp N<=64 " << (modexp ? "exact" : "MISMATCH");

  double qft_err = 0.0;
  for (int k = 1; k <= 6; ++k) {
    const std::uint64_t dim = std::uint64_t{1} << k;
    for (std::uint64_t a = 0; a < dim; ++a) {
      shor::QubitRegister r({{"s", k}});
      r.set_basis(a);
      r.qft("s");
      for (std::uint64_t c = 0; c < dim; ++c) {
        const Complex want = std::polar(std::pow(2.0, -0.5 * k),
                                        kTwoPi * static_cast<double>(a * c) / static_cast<double>(dim));
        qft_err = std::max(qft_err, std::abs(r[c] - want));
      }
    }
  }
  log << " QFT-DFT max err=" << qft_err;

  const auto comb = shor::qft_comb(8, 4).probabilities("left");
  const double mass = comb[0] + comb[64] + comb[128] + comb[192];
  log << " comb mass=" << mass;
  return ok && modexp && qft_err < 1e-10 && mass > 0.99;
}

bool ac8(std::ostringstream& log) {
  const auto est = shor::resource_estimate(430, 100e6);
  const double days = shor::nfs_days(est.nfs_mips_years, 100, 100);
  log << " N_g=" << static_cast<double>(est.gate_count) << " wall=" << est.wall_clock
      << " s NFS=" << est.nfs_mips_years << " MIPS-years fleet=" << days << " days";
  return within_rel(static_cast<double>(est.gate_count), 1.907e9, 1e-3) &&
         within_rel(static_cast<double>(est.gate_count), 2.0e9, 0.05) && within_rel(est.wall_clock, 19.1, 1e-2) &&
         within_rel(est.wall_clock, 20.0, 0.05) && within_rel(est.nfs_mips_years, 500.0, 1e-9) &&
         within_rel(days, 18.0, 0.1);
}

bool ac9(std::ostringstream& log) {
  const std::vector<std::vector<std::string>> runs = {
      {"shor", "factor", "--n", "21", "--seed", "7", "--no-shortcut"},
      {"shor", "factor", "--n", "15", "--seed", "7", "--mode", "right-first"},
      {"pulse", "run", "--ions", "2", "--initial", "10", "--measure", "--seed", "99"},
      {"pulse", "cnot-verify"},
      {"pulse", "scan", "--points", "3"},
      {"chain", "--n", "6", "--radial-mhz", "5"},
      {"trap"},
      {"laser", "--format", "csv"},
      {"shor", "estimate"},
      {"shor", "qft-demo", "--period", "3"},
      {"species"},
      {"shor", "factor", "--n", "17"},
  };
  int same = 0, spawned_same = 0;
  for (const auto& args : runs) {
    const auto a = cli_bytes(args), b = cli_bytes(args);
    same += a == b;
    std::string joined;
    for (const auto& s : args) joined += s + " ";
    const auto c = spawn_bytes(joined), d = spawn_bytes(joined);
    spawned_same += c == d && !c.empty();
  }
  log << " in-process identical " << same << "/" << runs.size() << ", binary identical " << spawned_same << "/"
      << runs.size();
  return same == static_cast<int>(runs.size()) && spawned_same == static_cast<int>(runs.size());
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"AC1", "CNOT from five pulses", ac1, 1.0},
      {"AC2", "Hadamard composition", ac2, 0.0},
      {"AC3", "chain oracles", ac3, 0.0},
      {"AC4", "trap numerics", ac4, 0.0},
      {"AC5", "laser tolerances", ac5, 0.0},
      {"AC6", "exact-pulse convergence", ac6, 60.0},
      {"AC7", "desk-scale factoring", ac7, 120.0},
      {"AC8", "resource estimates", ac8, 0.0},
      {"AC9", "CLI determinism", ac9, 0.0},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    std::ostringstream log;
    log.precision(6);
    bool ok = false;
    const auto t0 = Clock::now();
    try {
      ok = c.body(log);
    } catch (const std::exception& e) {
      log << " exception: " << e.what();
    }
    const double t = seconds_since(t0);
    if (c.time_limit_s > 0 && t > c.time_limit_s) {
      ok = false;
      log << " over time limit " << c.time_limit_s << " s";
    }
    failed += ok ? 0 : 1;
    std::printf("%s %s  %s (%.2f s):%s\n", c.id.c_str(), ok ? "PASS" : "FAIL", c.title.c_str(), t,
                log.str().c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}

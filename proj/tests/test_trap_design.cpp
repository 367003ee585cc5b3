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
#include <numbers>

#include "iontrap/trap_design.hpp"

using namespace iontrap;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

TrapConfig ref() { return reference_trap(ca40_species()); }

// Hand-evaluated reference values with raw constants.
constexpr double e = 1.602176634e-19;
constexpr double mass = 39.962590863 * 1.66053906660e-27 - 9.1093837015e-31;

}  // namespace

TEST_CASE("mathieu parameters", "[trap]") {
  const auto t = ref();
  const auto mp = mathieu_parameters(t);
  CHECK(mp.a == 0.0);
  const double w = 2 * std::numbers::pi * 11.5e6;
  CHECK_THAT(mp.q, WithinRel(2 * e * 500.0 / (mass * w * w * 1.4e-3 * 1.4e-3), 1e-4));
  CHECK_THAT(mp.q, WithinRel(0.236, 0.01));
  auto doubled = t;
  doubled.rf_amplitude *= 2;
  CHECK_THAT(mathieu_parameters(doubled).q, WithinRel(2 * mp.q, 1e-14));
  auto dc = t;
  dc.dc_offset = 3.0;
  CHECK_THAT(mathieu_parameters(dc).a,
             WithinRel(4 * e * 3.0 / (mass * w * w * 1.4e-3 * 1.4e-3), 1e-4));
}

TEST_CASE("pseudopotential depth", "[trap]") {
  const auto t = ref();
  CHECK_THAT(pseudopotential_depth(t), WithinRel(14.7, 0.03));
  auto tiny = t;
  tiny.rf_amplitude = 1e-9;
  CHECK(pseudopotential_depth(tiny) < 1e-20);
}

TEST_CASE("secular frequency", "[trap]") {
  const auto t = ref();
  const auto wr = secular_frequency(t);
  CHECK_FALSE(wr.flagged());
  CHECK_THAT(wr.value / kTwoPi, WithinRel(0.958e6, 0.01));
  auto half = t;
  half.rf_amplitude /= 2;
  CHECK_THAT(secular_frequency(half).value, WithinRel(wr.value / 2, 1e-14));

  auto hot = t;
  hot.rf_amplitude = 2000.0;  // q ~ 0.94
  CHECK(mathieu_parameters(hot).q > 0.9);
  CHECK(secular_frequency(hot).flagged());
}

TEST_CASE("secular frequency identities over random traps", "[trap][property]") {
  Catch::SimplePcg32 rng(1234);
  auto uniform = [&](double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(rng()) / 4294967296.0;
  };
  for (int i = 0; i < 500; ++i) {
    TrapConfig t = ref();
    t.rf_amplitude = uniform(10, 2000);
    t.rf_frequency = kTwoPi * uniform(1e6, 50e6);
    t.r0 = uniform(0.1e-3, 3e-3);
    t.dc_offset = uniform(-5, 5);
    const double q = mathieu_parameters(t).q;
    const double wr = secular_frequency(t).value;
    CHECK_THAT(wr, WithinRel(q * t.rf_frequency / (2 * std::numbers::sqrt2), 1e-12));
    const double depth_j = pseudopotential_depth(t) * kElectronVolt;
    CHECK_THAT(depth_j, WithinRel(0.5 * t.species.mass * wr * wr * t.r0 * t.r0, 1e-12));
  }
}

TEST_CASE("axial frequency calibration", "[trap]") {
  const auto t = ref();
  CHECK_THAT(axial_frequency(150.0, t), WithinRel(kTwoPi * 200e3, 1e-14));
  CHECK(axial_frequency(0.0, t) == 0.0);
  CHECK_THAT(axial_frequency(600.0, t), WithinRel(kTwoPi * 400e3, 1e-14));
  for (double v : {1.0, 37.0, 150.0, 912.0})
    for (double a : {0.25, 2.0, 9.0})
      CHECK_THAT(axial_frequency(a * v, t), WithinRel(std::sqrt(a) * axial_frequency(v, t), 1e-13));
  auto shielded = t;
  shielded.shielding_factor = 0.25;
  CHECK_THAT(axial_frequency(150.0, shielded), WithinRel(kTwoPi * 100e3, 1e-14));
  CHECK_THROWS_AS(axial_frequency(-1.0, t), InvalidArgument);
}

TEST_CASE("thermal localization", "[trap]") {
  const auto ca = ca40_species();
  const double wr = secular_frequency(ref()).value;
  const double r = thermal_localization(85e-6, wr, ca);
  CHECK_THAT(r, WithinRel(std::sqrt(1.380649e-23 * 85e-6 / (mass * wr * wr)), 1e-4));
  CHECK_THAT(r, WithinRel(22e-9, 0.03));
  CHECK(std::abs(r - 30e-9) / 30e-9 < 0.5);
  CHECK(thermal_localization(0.0, wr, ca) == 0.0);
  CHECK_THAT(thermal_localization(4 * 85e-6, wr, ca), WithinRel(2 * r, 1e-14));
}

TEST_CASE("crosstalk", "[trap]") {
  CHECK_THAT(crosstalk(20e-6, 21.6e-6), WithinRel(1.05e-3, 0.01));
  CHECK_THAT(crosstalk(20e-6, 10e-6), WithinRel(std::exp(-32.0), 1e-12));
  CHECK_THAT(crosstalk(20e-6, 10e-6), WithinRel(1.3e-14, 0.05));
  CHECK(crosstalk(20e-6, 0.0) == 0.0);
  CHECK(crosstalk(20e-6, 1e-9) == 0.0);
  double prev = 0.0;
  for (double d = 1e-6; d < 100e-6; d *= 1.1) {
    const double c = crosstalk(20e-6, d);
    CHECK(c >= prev);
    prev = c;
  }
  prev = 1.0;
  for (double s = 1e-6; s < 100e-6; s *= 1.1) {
    const double c = crosstalk(s, 21.6e-6);
    CHECK(c <= prev);
    prev = c;
  }
  CHECK_THROWS_AS(crosstalk(0.0, 1e-6), InvalidArgument);
}

TEST_CASE("trap report", "[trap]") {
  const auto r = evaluate_trap(ref());
  CHECK_THAT(r.secular_frequency, WithinRel(r.mathieu_q * kTwoPi * 11.5e6 / (2 * std::numbers::sqrt2), 1e-12));
  CHECK_THAT(r.axial_frequency, WithinRel(kTwoPi * 200e3, 1e-12));
  CHECK(r.temperature == kQuotedDopplerTemperature);
  CHECK(r.warnings.empty());
}

TEST_CASE("trap validation", "[trap]") {
  auto t = ref();
  t.r0 = 0.0;
  CHECK_THROWS_AS(mathieu_parameters(t), InvalidArgument);
  t = ref();
  t.shielding_factor = 1.5;
  CHECK_THROWS_AS(evaluate_trap(t), InvalidArgument);
  t = ref();
  t.rf_frequency = -1.0;
  CHECK_THROWS_AS(secular_frequency(t), InvalidArgument);
}

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

// Command-line front end. dispatch() runs one invocation in-process and
// writes either its result to `out` or a JSON error object to `err`, never
// both.

#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "iontrap/iontrap.hpp"

namespace iontrap::cli {

using nlohmann::json;

enum ExitCode : int {
  kOk = 0,
  kChecksFailed = 1,
  kUsage = 2,
  kInvalidInput = 3,
  kNumerical = 4,
  kIo = 5,
};

inline constexpr const char* kOutputDirEnv = "IONTRAP_OUTPUT_DIR";

/// Reported as a structured error rather than a result.
class CommandFailure : public Error {
 public:
  CommandFailure(const std::string& what, int code, json details)
      : Error(what), code_(code), details_(std::move(details)) {}
  int code() const noexcept { return code_; }
  const json& details() const noexcept { return details_; }

 private:
  int code_;
  json details_;
};

struct Payload {
  json result = json::object();
  std::vector<std::string> csv_header;
  std::vector<std::vector<std::string>> csv_rows;
  int exit_code = kOk;
};

namespace detail {

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

inline double khz(double f) { return kTwoPi * f * 1e3; }
inline double mhz(double f) { return kTwoPi * f * 1e6; }
inline double to_khz(double w) { return w / kTwoPi / 1e3; }
inline double to_mhz(double w) { return w / kTwoPi / 1e6; }

// Pass/fail table for --reference-examples.
struct Check {
  std::string name;
  double expected = 0.0;
  double actual = 0.0;
  double tolerance = 0.0;
  std::string mode;  // relative | absolute | factor | at_least

  bool passed() const {
    if (!std::isfinite(actual)) return false;
    if (mode == "relative") return std::abs(actual - expected) <= tolerance * std::abs(expected);
    if (mode == "absolute") return std::abs(actual - expected) <= tolerance;
    if (mode == "factor") return actual >= expected / tolerance && actual <= expected * tolerance;
    if (mode == "at_least") return actual >= expected - tolerance;
    return false;
  }
};

inline Payload check_table(const std::vector<Check>& checks) {
  Payload p;
  p.csv_header = {"check", "expected", "actual", "tolerance", "mode", "status"};
  int failed = 0;
  for (const auto& c : checks) {
    const bool ok = c.passed();
    failed += ok ? 0 : 1;
    p.result["checks"].push_back({{"check", c.name},
                                  {"expected", c.expected},
                                  {"actual", c.actual},
                                  {"tolerance", c.tolerance},
                                  {"mode", c.mode},
                                  {"passed", ok}});
    p.csv_rows.push_back({c.name, num(c.expected), num(c.actual), num(c.tolerance), c.mode,
                          ok ? "PASS" : "FAIL"});
  }
  p.result["passed"] = static_cast<int>(checks.size()) - failed;
  p.result["failed"] = failed;
  p.exit_code = failed == 0 ? kOk : kChecksFailed;
  return p;
}

inline void require_readable(const std::string& path, const std::string& what) {
  if (!std::ifstream(path)) throw CommandFailure("cannot open " + what + " " + path, kIo, json::object());
}

inline IonSpecies resolve_species(const std::string& ion, const std::string& file) {
  if (file.empty()) return lookup_species(ion);
  require_readable(file, "species file");
  return load_species_file(file);
}

inline json species_json(const IonSpecies& s) {
  json j = s;
  for (auto& t : j["transitions"]) {
    const auto& tr = s.transition(t["label"].get<std::string>());
    t["linewidth_mhz"] = tr.linewidth() / kTwoPi / 1e6;
    if (tr.kind == TransitionKind::dipole) t["doppler_limit_uk"] = doppler_limit(tr.linewidth()) * 1e6;
  }
  return j;
}

inline json complex_json(Complex z) { return {{"re", z.real()}, {"im", z.imag()}}; }

inline json gate_json(const GateMatrix& g) {
  json rows = json::array();
  for (std::size_t r = 0; r < g.dim; ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < g.dim; ++c) row.push_back(complex_json(g(r, c)));
    rows.push_back(row);
  }
  return rows;
}

inline json pulses_json(const std::vector<PulseSpec>& seq) {
  json a = json::array();
  for (const auto& p : seq)
    a.push_back({{"kind", to_string(p.kind)}, {"ion", p.ion}, {"theta", p.theta}, {"phi", p.phi}});
  return a;
}

inline std::vector<PulseSpec> load_sequence(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CommandFailure("cannot open sequence file " + path, kIo, json::object());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InvalidArgument("sequence file " + path + ": " + e.what());
  }
  if (!j.is_array()) throw InvalidArgument("sequence file must hold a JSON array of pulses");
  std::vector<PulseSpec> seq;
  for (const auto& p : j) {
    try {
      seq.push_back({pulse_kind_from_string(p.at("kind").get<std::string>()), p.at("ion").get<int>(),
                     p.at("theta").get<double>(), p.value("phi", 0.0)});
    } catch (const json::exception& e) {
      throw InvalidArgument(std::string("malformed pulse record: ") + e.what());
    }
  }
  return seq;
}

// ---------------------------------------------------------------------------
// Reference example tables

inline std::vector<Check> species_checks() {
  const auto ca = ca40_species();
  return {
      {"729 nm upper-level lifetime (s)", 1.06, ca.transition_near(729.147e-9).lifetime, 0.01, "relative"},
      {"732 nm upper-level lifetime (s)", 1.08, ca.transition_near(732.389e-9).lifetime, 0.01, "relative"},
      {"ca40 mass vs 40 u (kg)", 40 * 1.66054e-27, ca.mass, 1e-3, "relative"},
  };
}

inline std::vector<Check> chain_checks() {
  const auto ca = ca40_species();
  const auto spacing = min_spacing(2, khz(200), ca);
  const auto model = build_chain_model({ca, 10, khz(500)});
  double s1 = 0.0;
  for (double s : model.coupling_constants[0]) s1 = std::max(s1, std::abs(s - 1.0));
  return {
      {"N_max(5 MHz, 500 kHz)", 24, static_cast<double>(max_linear_ions(mhz(5), khz(500))), 0, "absolute"},
      {"N_max(5 MHz, 100 kHz)", 151, static_cast<double>(max_linear_ions(mhz(5), khz(100))), 0, "absolute"},
      {"min spacing fit, N=2, 200 kHz (um)", 20.0, spacing.fit * 1e6, 0.25, "relative"},
      {"min spacing exact, N=2, 200 kHz (um)", 16.4, spacing.exact * 1e6, 0.01, "relative"},
      {"CM mode frequency, N=10", 1.0, model.mode_frequencies[0], 1e-9, "absolute"},
      {"max |s1_m - 1|, N=10", 0.0, s1, 1e-9, "absolute"},
  };
}

inline std::vector<Check> trap_checks() {
  const auto t = reference_trap(ca40_species());
  const auto r = evaluate_trap(t);
  return {
      {"Mathieu a at zero DC offset", 0.0, r.mathieu_a, 0.0, "absolute"},
      {"pseudo-well depth (eV), nominal 15", 14.7, r.pseudo_well_depth, 0.03, "relative"},
      {"axial frequency at 150 V (kHz)", 200.0, to_khz(r.axial_frequency), 1e-9, "relative"},
      {"thermal localization at 85 uK (nm)", 30.0, r.localization_radius * 1e9, 0.5, "relative"},
      {"crosstalk, 20 um spacing, 21.6 um spot", 1e-3, crosstalk(20e-6, 21.6e-6), 0.1, "relative"},
  };
}

inline std::vector<Check> laser_checks() {
  const auto ca = ca40_species();
  const auto& line = ca.transition("S1/2-D5/2");
  const double eta = lamb_dicke(ca, khz(500), LaserParams{});
  const auto b = pulse_bounds(10, eta, khz(500));
  LaserParams full;
  full.axial_projection = 1.0;
  const auto power = laser_power(full, ca, line, 10, khz(500), 5e-6);
  return {
      {"t_V bound, 10 ions (ns)", 7.5, b.t_v_min * 1e9, 0.05, "relative"},
      {"t_U traveling bound, 10 ions (us)", 130.0, b.t_u_traveling_min * 1e6, 0.05, "relative"},
      {"t_U standing bound (us)", 2.6, b.t_u_standing_min * 1e6, 0.02, "relative"},
      {"single-laser power, 10 ions, 5 us (mW)", 25.0, power.power * 1e3, 2.0, "factor"},
      {"gate error constant, standing", 8.9e-6, gate_error(ErrorScheme::standing, 1), 0, "absolute"},
      {"gate error constant, traveling", 3.6e-5, gate_error(ErrorScheme::traveling, 1), 0, "absolute"},
      {"gate error constant, raman", 1.3e-8, gate_error(ErrorScheme::raman, 1), 0, "absolute"},
  };
}

inline std::vector<Check> pulse_checks() {
  const RegisterSpace one(1, 1);
  const auto zero = StateVector::basis(one, {kLevel0});
  const auto v = apply_v(zero, 0, kPi, kPi / 2);
  const auto v4 = apply_v(zero, 0, 4 * kPi, 0.3);
  const auto v2 = apply_v(zero, 0, 2 * kPi, 0.3);
  const auto h = hadamard(zero, 0);
  const double r = 1 / std::sqrt(2.0);
  const double h_err = std::max(std::abs(h[one.index({kLevel0}, 0)] - r),
                                std::abs(h[one.index({kLevel1}, 0)] - r));
  const RegisterSpace two(2, 1);
  const auto g = extract_gate(two, {0, 1}, [](StateVector s) { return cnot(std::move(s), 0, 1); });
  const auto g2 = extract_gate(two, {0, 1}, [](StateVector s) { return cnot(cnot(std::move(s), 0, 1), 0, 1); });
  GateMatrix id{4, std::vector<Complex>(16), std::vector<double>(4)};
  for (std::size_t i = 0; i < 4; ++i) id.data[i * 5] = 1.0;
  const auto bell = cnot(hadamard(StateVector::basis(two, {kLevel0, kLevel0}), 0), 0, 1);
  return {
      {"V(pi, pi/2)|0> overlap with |1>", 1.0, std::real(v[one.index({kLevel1}, 0)]), 1e-12, "absolute"},
      {"V(4pi)|0> amplitude", 1.0, std::real(v4[0]), 1e-12, "absolute"},
      {"V(2pi)|0> amplitude", -1.0, std::real(v2[0]), 1e-12, "absolute"},
      {"Hadamard |0> amplitude error", 0.0, h_err, 1e-10, "absolute"},
      {"CNOT fidelity up to global phase", 1.0 - 1e-10, phase_insensitive_fidelity(cnot_truth_table(), g), 0, "at_least"},
      {"CNOT twice vs identity", 1.0 - 1e-10, phase_insensitive_fidelity(id, g2), 0, "at_least"},
      {"Bell population |11>", 0.5, std::norm(bell[two.index({kLevel1, kLevel1}, 0)]), 1e-12, "absolute"},
  };
}

inline std::vector<Check> shor_checks() {
  const auto est = shor::resource_estimate(430, 100e6);
  shor::QubitRegister q({{"q", 1}});
  q.hadamard_all("q");
  const auto f15 = shor::factor(15, 1);
  double product = 1.0;
  for (auto f : f15.factors) product *= static_cast<double>(f);
  const auto comb = shor::qft_comb(8, 4).probabilities("left");
  return {
      {"gate count at 430 bits, nominal 2.0e9", 2.0e9, static_cast<double>(est.gate_count), 0.05, "relative"},
      {"wall clock at 100 MHz (s), quoted ~20", 20.0, est.wall_clock, 0.05, "relative"},
      {"qubits at 430 bits", 2154, static_cast<double>(est.qubit_count), 0, "absolute"},
      {"NFS cost at 430 bits (MIPS-years)", 500.0, shor::nfs_cost(430), 1e-9, "relative"},
      {"NFS days on 100 x 100 MIPS", 18.0, shor::nfs_days(shor::nfs_cost(430), 100, 100), 0.1, "relative"},
      {"one-qubit superposition amplitude", 1 / std::sqrt(2.0), q[1].real(), 1e-12, "absolute"},
      {"factor(15) product", 15.0, f15.success ? product : 0.0, 0, "absolute"},
      {"period-4 comb mass on multiples of 64", 0.99, comb[0] + comb[64] + comb[128] + comb[192], 0, "at_least"},
  };
}

// ---------------------------------------------------------------------------
// Config handling

// Appends "--key value" tokens from a JSON config file for every key not
// already given on the command line.
inline void merge_config(std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in) throw CommandFailure("cannot open config file " + path, kIo, json::object());
  json cfg;
  try {
    in >> cfg;
  } catch (const json::exception& e) {
    throw InvalidArgument("config file " + path + ": " + e.what());
  }
  if (!cfg.is_object()) throw InvalidArgument("config file must hold a JSON object");
  auto given = [&](const std::string& flag) {
    for (const auto& a : args)
      if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    return false;
  };
  auto token = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
  for (const auto& [key, value] : cfg.items()) {
    const std::string flag = "--" + key;
    if (key == "config" || given(flag)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back(flag);
    } else if (value.is_array()) {
      args.push_back(flag);
      for (const auto& v : value) args.push_back(token(v));
    } else if (!value.is_null()) {
      args.push_back(flag);
      args.push_back(token(value));
    }
  }
}

inline json typed_value(const std::string& s) {
  if (s.empty()) return nullptr;
  char* end = nullptr;
  const double d = std::strtod(s.c_str(), &end);
  if (end && *end == '\0') {
    if (s.find_first_of(".eE") == std::string::npos && std::abs(d) < 9e15)
      return static_cast<std::int64_t>(std::llround(d));
    return d;
  }
  if (s == "true") return true;
  if (s == "false") return false;
  return s;
}

// Every option of the leaf command with its resolved value.
inline json resolved_config(const CLI::App& leaf) {
  json cfg = json::object();
  for (const CLI::Option* opt : leaf.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string name = opt->get_lnames().front();
    if (name == "help") continue;
    if (opt->get_expected_max() == 0) {
      cfg[name] = opt->count() > 0;
      continue;
    }
    const bool multi = opt->get_items_expected_max() > 1;
    if (opt->count() > 0) {
      const auto& res = opt->results();
      if (multi) {
        json a = json::array();
        for (const auto& r : res) a.push_back(typed_value(r));
        cfg[name] = a;
      } else {
        cfg[name] = typed_value(res.back());
      }
    } else {
      cfg[name] = typed_value(opt->get_default_str());
    }
  }
  return cfg;
}

inline std::string render_csv(const Payload& p, const std::string& command, const json& config) {
  std::ostringstream os;
  os << "# iontrap " << kVersion << " " << command << "\n";
  os << "# config " << config.dump() << "\n";
  for (std::size_t i = 0; i < p.csv_header.size(); ++i)
    os << (i ? "," : "") << csv_field(p.csv_header[i]);
  os << "\n";
  for (const auto& row : p.csv_rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_field(row[i]);
    os << "\n";
  }
  return os.str();
}

}  // namespace detail

// ---------------------------------------------------------------------------

struct Common {
  std::string format = "json";
  std::uint64_t seed = 0;
  std::string config;
  std::string output;
  bool reference_examples = false;
};

inline void add_common(CLI::App* sub, Common& c, const std::string& default_format) {
  c.format = default_format;
  sub->add_option("--format", c.format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  sub->add_option("--seed", c.seed, "Seed for every random draw")->capture_default_str();
  sub->add_option("--config", c.config, "JSON file of option values; command-line flags win");
  sub->add_option("--output", c.output,
                  "Write to this file instead of stdout; relative paths resolve under $" +
                      std::string(kOutputDirEnv) + " when set");
  sub->add_flag("--reference-examples", c.reference_examples,
                "Run this module's reference examples and print a pass/fail table");
}

inline std::string error_json(const std::string& type, const std::string& message, int code,
                              const json& details = json::object()) {
  json e = {{"error", {{"type", type}, {"message", message}, {"exit_code", code}}},
            {"version", kVersion}};
  if (!details.empty()) e["error"]["details"] = details;
  return e.dump(2) + "\n";
}

/// Runs one CLI invocation; `args` excludes the program name.
inline int dispatch(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Trapped-ion quantum computer simulator and design toolkit", "iontrap"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::map<const CLI::App*, std::function<Payload()>> handlers;
  std::map<const CLI::App*, Common*> commons;
  std::vector<std::unique_ptr<Common>> common_store;
  auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& desc,
                  const std::string& default_format = "json") {
    CLI::App* sub = parent->add_subcommand(name, desc);
    common_store.push_back(std::make_unique<Common>());
    add_common(sub, *common_store.back(), default_format);
    commons[sub] = common_store.back().get();
    return sub;
  };
  using namespace detail;

  // species ------------------------------------------------------------------
  std::string sp_ion, sp_file;
  {
    auto* sub = leaf(&app, "species", "List the ion species data");
    sub->add_option("--ion", sp_ion, "Only this species");
    sub->add_option("--species-file", sp_file, "Load a species record from a JSON file");
    handlers[sub] = [&, sub] {
      if (commons[sub]->reference_examples) return check_table(species_checks());
      std::vector<IonSpecies> list;
      if (!sp_file.empty()) list.push_back(resolve_species("", sp_file));
      else if (!sp_ion.empty()) list.push_back(lookup_species(sp_ion));
      else
        for (const auto& n : species_names()) list.push_back(lookup_species(n));
      Payload p;
      p.result["dataset_version"] = species_dataset().at("dataset_version");
      p.result["species"] = json::array();
      p.csv_header = {"species", "label", "wavelength_nm", "einstein_A", "lifetime_s", "kind"};
      for (const auto& s : list) {
        p.result["species"].push_back(species_json(s));
        for (const auto& t : s.transitions)
          p.csv_rows.push_back({s.name, t.label, num(t.wavelength * 1e9), num(t.einstein_A),
                                num(t.lifetime), to_string(t.kind)});
      }
      return p;
    };
  }

  // chain ----------------------------------------------------------------------
  std::string ch_ion = "ca40", ch_file;
  int ch_n = 2;
  double ch_khz = 200.0;
  std::optional<double> ch_radial;
  {
    auto* sub = leaf(&app, "chain", "Equilibrium positions and normal modes of an ion chain");
    sub->add_option("--ion", ch_ion, "Species name")->capture_default_str();
    sub->add_option("--species-file", ch_file, "Species record file (overrides --ion)");
    sub->add_option("--n", ch_n, "Number of ions")->capture_default_str();
    sub->add_option("--axial-khz", ch_khz, "Axial frequency / 2pi in kHz")->capture_default_str();
    sub->add_option("--radial-mhz", ch_radial, "Radial frequency / 2pi in MHz, for N_max");
    handlers[sub] = [&, sub] {
      if (commons[sub]->reference_examples) return check_table(chain_checks());
      const ChainConfig cfg{resolve_species(ch_ion, ch_file), ch_n, khz(ch_khz)};
      const auto model = build_chain_model(cfg);
      Payload p;
      auto& r = p.result;
      r["length_scale_um"] = model.length_scale * 1e6;
      r["positions_um"] = json::array();
      for (double x : model.positions) r["positions_um"].push_back(x * 1e6);
      r["scaled_positions"] = model.scaled_positions;
      r["mode_frequencies"] = model.mode_frequencies;
      json vectors = json::array();
      const auto n = model.mode_frequencies.size();
      for (std::size_t q = 0; q < n; ++q) {
        json v = json::array();
        for (std::size_t m = 0; m < n; ++m) v.push_back(model.mode_vectors(m, q));
        vectors.push_back(v);
      }
      r["mode_vectors"] = vectors;
      r["coupling_constants"] = model.coupling_constants;
      json c = json::array();
      for (std::size_t i = 0; i < n; ++i) c.push_back(model.coupling_matrix.row(i));
      r["coupling_matrix_kg_per_s2"] = c;
      r["force_residual"] = model.force_residual;
      if (ch_n >= 2) {
        const auto s = min_spacing(ch_n, cfg.axial_frequency, cfg.species);
        r["min_spacing_um"] = {{"fit", s.fit * 1e6}, {"exact", s.exact * 1e6}};
      } else {
        r["min_spacing_um"] = nullptr;
      }
      r["max_linear_ions"] = ch_radial ? json(max_linear_ions(mhz(*ch_radial), cfg.axial_frequency))
                                       : json(nullptr);
      p.csv_header = {"ion", "position_um", "scaled_position"};
      for (std::size_t m = 0; m < n; ++m)
        p.csv_rows.push_back({std::to_string(m), num(model.positions[m] * 1e6),
                              num(model.scaled_positions[m])});
      return p;
    };
  }

  // trap -----------------------------------------------------------------------
  std::string tr_ion = "ca40", tr_file;
  double tr_rf = 500, tr_rf_mhz = 11.5, tr_dc = 0, tr_r0 = 1.4, tr_end = 150, tr_kappa = 1;
  double tr_temp = kQuotedDopplerTemperature * 1e6, tr_cal_v = 150, tr_cal_khz = 200;
  double tr_spacing = 20, tr_spot = 21.6;
  {
    auto* sub = leaf(&app, "trap", "Paul trap design report");
    sub->add_option("--ion", tr_ion, "Species name")->capture_default_str();
    sub->add_option("--species-file", tr_file, "Species record file (overrides --ion)");
    sub->add_option("--rf-volts", tr_rf, "RF amplitude (V)")->capture_default_str();
    sub->add_option("--rf-mhz", tr_rf_mhz, "RF frequency / 2pi (MHz)")->capture_default_str();
    sub->add_option("--dc-volts", tr_dc, "DC offset (V)")->capture_default_str();
    sub->add_option("--r0-mm", tr_r0, "Electrode distance r0 (mm)")->capture_default_str();
    sub->add_option("--endcap-volts", tr_end, "Endcap voltage (V)")->capture_default_str();
    sub->add_option("--shielding", tr_kappa, "Shielding factor kappa")->capture_default_str();
    sub->add_option("--temperature-uk", tr_temp, "Ion temperature (uK)")->capture_default_str();
    sub->add_option("--calib-volts", tr_cal_v, "Axial calibration voltage (V)")->capture_default_str();
    sub->add_option("--calib-khz", tr_cal_khz, "Axial calibration frequency / 2pi (kHz)")
        ->capture_default_str();
    sub->add_option("--spacing-um", tr_spacing, "Ion spacing for crosstalk (um)")->capture_default_str();
    sub->add_option("--spot-um", tr_spot, "1/e^2 spot diameter for crosstalk (um)")
        ->capture_default_str();
    handlers[sub] = [&, sub] {
      if (commons[sub]->reference_examples) return check_table(trap_checks());
      const TrapConfig t{resolve_species(tr_ion, tr_file), tr_rf, tr_dc, mhz(tr_rf_mhz),
                         tr_r0 * 1e-3, tr_end, tr_kappa};
      const auto rep = evaluate_trap(t, tr_temp * 1e-6, {tr_cal_v, khz(tr_cal_khz)});
      const double xt = crosstalk(tr_spacing * 1e-6, tr_spot * 1e-6);
      Payload p;
      p.result = {{"mathieu_a", rep.mathieu_a},
                  {"mathieu_q", rep.mathieu_q},
                  {"secular_frequency_mhz", to_mhz(rep.secular_frequency)},
                  {"pseudo_well_depth_ev", rep.pseudo_well_depth},
                  {"axial_frequency_khz", to_khz(rep.axial_frequency)},
                  {"localization_radius_nm", rep.localization_radius * 1e9},
                  {"temperature_uk", rep.temperature * 1e6},
                  {"crosstalk", xt},
                  {"warnings", rep.warnings}};
      p.result["conventions"] = {
          {"frequencies", "ordinary frequencies; angular frequency = 2pi x value"},
          {"pseudo_well_depth", "pseudopotential energy at rho = r0"},
          {"localization_radius", "1-sigma thermal radius sqrt(k_B T / (M w_r^2))"},
          {"axial_frequency", "w_x = w_ref sqrt(kappa V / V_ref), calibrated at (calib-volts, calib-khz)"},
          {"crosstalk", "Gaussian intensity exp(-2 s^2 / w^2) at the neighbour, w = diameter / 2"}};
      p.csv_header = {"quantity", "value", "unit"};
      p.csv_rows = {{"mathieu_a", num(rep.mathieu_a), ""},
                    {"mathieu_q", num(rep.mathieu_q), ""},
                    {"secular_frequency", num(to_mhz(rep.secular_frequency)), "MHz"},
                    {"pseudo_well_depth", num(rep.pseudo_well_depth), "eV"},
                    {"axial_frequency", num(to_khz(rep.axial_frequency)), "kHz"},
                    {"localization_radius", num(rep.localization_radius * 1e9), "nm"},
                    {"crosstalk", num(xt), ""}};
      return p;
    };
  }

  // laser ----------------------------------------------------------------------
  std::string la_scheme = "single", la_ion = "ca40", la_file, la_line, la_error;
  int la_ions = 10;
  double la_khz = 500, la_beta = 1, la_spot = 10, la_tu = 5, la_detuning_ghz = 0;
  std::optional<double> la_proj_deg, la_proj, la_wavelength;
  {
    auto* sub = leaf(&app, "laser", "Laser interaction, pulse-time bounds, power and error budget");
    sub->add_option("--scheme", la_scheme, "single or raman")
        ->check(CLI::IsMember({"single", "raman"}))
        ->capture_default_str();
    sub->add_option("--ion", la_ion, "Species name")->capture_default_str();
    sub->add_option("--species-file", la_file, "Species record file (overrides --ion)");
    sub->add_option("--ions", la_ions, "Number of ions in the chain")->capture_default_str();
    sub->add_option("--axial-khz", la_khz, "Axial frequency / 2pi (kHz)")->capture_default_str();
    sub->add_option("--projection-deg", la_proj_deg,
                    "Beam angle to the chain normal; projection = sin(angle). Single laser "
                    "defaults to 10 degrees, Raman has no default");
    sub->add_option("--projection", la_proj, "Axial projection factor in (0, 1]; overrides --projection-deg");
    sub->add_option("--wavelength-nm", la_wavelength,
                    "Laser wavelength (nm); default 729.147 single, 396.847 Raman");
    sub->add_option("--line", la_line, "Transition label setting the coupling (default: nearest line)");
    sub->add_option("--beta", la_beta, "Polarization factor")->capture_default_str();
    sub->add_option("--raman-detuning-ghz", la_detuning_ghz, "Raman detuning / 2pi (GHz)")
        ->capture_default_str();
    sub->add_option("--spot-um", la_spot, "Beam waist w0 (um)")->capture_default_str();
    sub->add_option("--tu-us", la_tu, "U-pulse duration for the power budget (us)")->capture_default_str();
    sub->add_option("--error-scheme", la_error, "standing, traveling or raman (default follows --scheme)")
        ->check(CLI::IsMember({"standing", "traveling", "raman"}));
    handlers[sub] = [&, sub] {
      if (commons[sub]->reference_examples) return check_table(laser_checks());
      const auto species = resolve_species(la_ion, la_file);
      LaserParams lp;
      lp.scheme = la_scheme == "raman" ? LaserScheme::raman : LaserScheme::single;
      lp.wavelength = la_wavelength ? *la_wavelength * 1e-9
                                    : (lp.scheme == LaserScheme::raman ? 396.847e-9 : 729.147e-9);
      lp.polarization_factor = la_beta;
      lp.raman_detuning = kTwoPi * la_detuning_ghz * 1e9;
      lp.spot_radius = la_spot * 1e-6;
      if (la_proj) lp.axial_projection = *la_proj;
      else if (la_proj_deg) lp.axial_projection = std::sin(*la_proj_deg * kPi / 180.0);
      const Transition& line = la_line.empty() ? species.transition_near(lp.wavelength)
                                               : species.transition(la_line);
      ErrorScheme es = lp.scheme == LaserScheme::raman ? ErrorScheme::raman : ErrorScheme::traveling;
      if (la_error == "standing") es = ErrorScheme::standing;
      if (la_error == "traveling") es = ErrorScheme::traveling;
      if (la_error == "raman") es = ErrorScheme::raman;
      const auto rep = evaluate_tolerances(lp, species, line, la_ions, khz(la_khz), la_tu * 1e-6, es);
      std::vector<std::string> warnings = rabi_one(rep.power_detail.rabi_zero, rep.eta, la_ions).warnings;
      if (lp.scheme == LaserScheme::raman &&
          std::abs(lp.raman_detuning) < 10 * rep.power_detail.rabi_zero)
        warnings.push_back("Raman detuning below 10x Omega_0: virtual-level approximation suspect");
      Payload p;
      p.result = {{"eta", rep.eta},
                  {"t_v_min_ns", rep.t_v_min * 1e9},
                  {"t_u_traveling_min_us", rep.t_u_traveling_min * 1e6},
                  {"t_u_standing_min_us", rep.t_u_standing_min * 1e6},
                  {"power_mw", rep.power * 1e3},
                  {"gate_error", rep.gate_error},
                  {"error_scheme", to_string(es)},
                  {"rabi_zero", rep.power_detail.rabi_zero},
                  {"rabi_one", rep.power_detail.rabi_one},
                  {"field_v_per_m", rep.power_detail.field},
                  {"power_derivation", rep.power_detail.derivation},
                  {"closed_form_power_mw", rep.power_detail.closed_form_power * 1e3},
                  {"warnings", warnings}};
      p.result["assumptions"] = {{"scheme", to_string(lp.scheme)},
                                 {"axial_projection", resolved_projection(lp)},
                                 {"beta", lp.polarization_factor},
                                 {"line", line.label},
                                 {"einstein_A", line.einstein_A},
                                 {"wavelength_nm", lp.wavelength * 1e9},
                                 {"spot_radius_um", lp.spot_radius * 1e6},
                                 {"t_u_us", la_tu},
                                 {"power_note", lp.scheme == LaserScheme::raman ? "per beam, equal pump and Stokes powers"
                                                                                : "single beam"},
                                 {"closed_form_note", "closed-form power expression is not dimensionally consistent; shown for comparison only"}};
      p.csv_header = {"quantity", "value", "unit"};
      p.csv_rows = {{"eta", num(rep.eta), ""},
                    {"t_v_min", num(rep.t_v_min * 1e9), "ns"},
                    {"t_u_traveling_min", num(rep.t_u_traveling_min * 1e6), "us"},
                    {"t_u_standing_min", num(rep.t_u_standing_min * 1e6), "us"},
                    {"power", num(rep.power * 1e3), "mW"},
                    {"gate_error", num(rep.gate_error), ""}};
      return p;
    };
  }

  // pulse ----------------------------------------------------------------------
  auto* pulse = app.add_subcommand("pulse", "Laser-pulse quantum logic on the ion register");
  pulse->require_subcommand(1);
  int pr_ions = 2, pr_nmax = 1, pr_phonons = 0;
  std::string pr_seq, pr_initial;
  bool pr_measure = false;
  {
    auto* sub = leaf(pulse, "run", "Apply a pulse sequence to a basis state");
    sub->add_option("--ions", pr_ions, "Number of ions")->capture_default_str();
    sub->add_option("--nmax", pr_nmax, "Phonon cutoff")->capture_default_str();
    sub->add_option("--seq", pr_seq, "JSON file: list of {kind, ion, theta, phi}");
    sub->add_option("--initial", pr_initial, "Initial levels, one char per ion (0, 1, a); default all 0");
    sub->add_option("--initial-phonons", pr_phonons, "Initial phonon number")->capture_default_str();
    sub->add_flag("--measure", pr_measure, "Read out every ion after the sequence");
    handlers[sub] = [&, sub] {
      if (commons[sub]->reference_examples) return check_table(pulse_checks());
      const RegisterSpace space(pr_ions, pr_nmax);
      std::vector<int> levels(static_cast<std::size_t>(pr_ions), kLevel0);
      if (!pr_initial.empty()) {
        if (pr_initial.size() != levels.size())
          throw InvalidArgument("--initial needs one character per ion");
        for (std::size_t m = 0; m < levels.size(); ++m) {
          const char ch = pr_initial[m];
          if (ch != '0' && ch != '1' && ch != 'a') throw InvalidArgument("--initial characters must be 0, 1 or a");
          levels[m] = ch == 'a' ? kLevelAux : ch - '0';
        }
      }
      const auto seq = pr_seq.empty() ? std::vector<PulseSpec>{} : load_sequence(pr_seq);
      const auto psi = apply_sequence(StateVector::basis(space, levels, pr_phonons), seq);
      Payload p;
      p.result["pulses"] = pulses_json(seq);
      p.result["amplitudes"] = json::array();
      p.csv_header = {"index", "label", "re", "im", "probability"};
      for (std::size_t i = 0; i < psi.size(); ++i) {
        const double pr = std::norm(psi[i]);
        if (pr < 1e-24) continue;
        p.result["amplitudes"].push_back(
            {{"index", i}, {"label", space.label(i)}, {"re", psi[i].real()}, {"im", psi[i].imag()}, {"probability", pr}});
        p.csv_rows.push_back({std::to_string(i), space.label(i), num(psi[i].real()), num(psi[i].imag()), num(pr)});
      }
      p.result["norm"] = psi.norm();
      p.result["aux_population"] = psi.aux_population();
      p.result["excited_phonon_population"] = psi.population_above_phonon(0);
      if (pr_measure) {
        const auto m = measure(psi, commons[sub]->seed);
        p.result["measurement"] = {{"bits", m.bits}, {"aux_population", m.aux_population}, {"aux_flag", m.aux_flag}};
      } else {
        p.result["measurement"] = nullptr;
      }
      return p;
    };
  }

  int cv_control = 0, cv_target = 1;
  std::string cv_sequence = "corrected", cv_report;
  {
    auto* sub = leaf(pulse, "cnot-verify", "Extract the CNOT matrix from the five-pulse sequence");
    sub->add_option("--control", cv_control, "Control ion")->capture_default_str();
    sub->add_option("--target", cv_target, "Target ion")->capture_default_str();
    sub->add_option("--sequence", cv_sequence, "corrected or verbatim")
        ->check(CLI::IsMember({"corrected", "verbatim"}))
        ->capture_default_str();
    sub->add_option("--report", cv_report, "Alias of --format")->check(CLI::IsMember({"json", "csv"}));
    handlers[sub] = [&, sub] {
      if (commons[sub]->reference_examples) return check_table(pulse_checks());
      if (!cv_report.empty()) commons[sub]->format = cv_report;
      const RegisterSpace space(2, 1);
      auto run = [&](const std::string& which) {
        const auto seq = which == "verbatim" ? cnot_verbatim_sequence(cv_control, cv_target)
                                             : cnot_sequence(cv_control, cv_target);
        return std::pair{seq, extract_gate(space, {cv_control, cv_target}, [&](StateVector s) {
                           require_phonon_ground(s);
                           return apply_sequence(std::move(s), seq);
                         })};
      };
      const auto [seq, g] = run(cv_sequence);
      const auto expected = cnot_truth_table();
      const double f = phase_insensitive_fidelity(expected, g);
      const auto g2 = extract_gate(space, {cv_control, cv_target}, [&](StateVector s) {
        return apply_sequence(apply_sequence(std::move(s), seq), seq);
      });
      GateMatrix id{4, std::vector<Complex>(16), std::vector<double>(4)};
      for (std::size_t i = 0; i < 4; ++i) id.data[i * 5] = 1.0;
      json phases = json::array();
      for (std::size_t c = 0; c < 4; ++c) {
        std::size_t best = 0;
        for (std::size_t r = 1; r < 4; ++r)
          if (std::abs(g(r, c)) > std::abs(g(best, c))) best = r;
        phases.push_back({{"input", c}, {"output", best}, {"phase", std::arg(g(best, c))}});
      }
      const std::string other = cv_sequence == "verbatim" ? "corrected" : "verbatim";
      Payload p;
      p.result = {{"sequence", cv_sequence},
                  {"pulses", pulses_json(seq)},
                  {"basis", {"|00>", "|01>", "|10>", "|11>"}},
                  {"basis_order", "control then target"},
                  {"matrix", gate_json(g)},
                  {"fidelity", f},
                  {"infidelity", 1.0 - f},
                  {"max_column_infidelity", max_column_infidelity(expected, g)},
                  {"leakage", g.leakage},
                  {"squared_identity_fidelity", phase_insensitive_fidelity(id, g2)},
                  {"dominant_entries", phases},
                  {"other_sequence", {{"sequence", other}, {"fidelity", phase_insensitive_fidelity(expected, run(other).second)}}}};
      p.csv_header = {"row", "col", "re", "im", "abs"};
      for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c)
          p.csv_rows.push_back({std::to_string(r), std::to_string(c), num(g(r, c).real()),
                                num(g(r, c).imag()), num(std::abs(g(r, c)))});
      return p;
    };
  }

  double sc_eta = 0.1, sc_khz = 500, sc_tol = 1e-10;
  int sc_ions = 1, sc_nmax = 3, sc_points = 6;
  bool sc_standing = false;
  std::vector<double> sc_range;
  {
    auto* sub = leaf(pulse, "scan", "Sideband pi-pulse infidelity versus pulse length", "csv");
    sub->add_option("--tu-range", sc_range,
                    "Pulse-length range in us (two values); default 30x to 300x the traveling-wave bound")
        ->expected(2);
    sub->add_option("--points", sc_points, "Log-spaced points")->capture_default_str();
    sub->add_option("--eta", sc_eta, "Lamb-Dicke parameter")->capture_default_str();
    sub->add_option("--ions", sc_ions, "Number of ions (sets Omega_0 = sqrt(N) Omega_1 / eta)")
        ->capture_default_str();
    sub->add_option("--axial-khz", sc_khz, "Axial frequency / 2pi (kHz)")->capture_default_str();
    sub->add_option("--nmax", sc_nmax, "Phonon cutoff")->capture_default_str();
    sub->add_option("--tolerance", sc_tol, "Integrator tolerance")->capture_default_str();
    sub->add_flag("--standing", sc_standing, "Ion at a carrier node of a standing wave");
    handlers[sub] = [&, sub] {
      if (commons[sub]->reference_examples) return check_table(pulse_checks());
      SidebandScanParams sp;
      sp.eta = sc_eta;
      sp.ion_count = sc_ions;
      sp.axial_frequency = khz(sc_khz);
      sp.standing_wave = sc_standing;
      sp.phonon_cutoff = sc_nmax;
      sp.tolerance = sc_tol;
      const double bound = pulse_bounds(sc_ions, sc_eta, sp.axial_frequency).t_u_traveling_min;
      const double lo = sc_range.empty() ? 30 * bound : sc_range[0] * 1e-6;
      const double hi = sc_range.empty() ? 300 * bound : sc_range[1] * 1e-6;
      const auto pts = sideband_scan(sp, lo, hi, sc_points);
      Payload p;
      p.result["bound_us"] = bound * 1e6;
      p.result["points"] = json::array();
      p.csv_header = {"t_u_us", "infidelity"};
      for (const auto& pt : pts) {
        p.result["points"].push_back({{"t_u_us", pt.t_u * 1e6}, {"infidelity", pt.infidelity}});
        p.csv_rows.push_back({num(pt.t_u * 1e6), num(pt.infidelity)});
      }
      p.result["log_log_slope"] = log_log_slope(pts);
      return p;
    };
  }

  // shor -----------------------------------------------------------------------
  auto* shor_cmd = app.add_subcommand("shor", "Desk-scale factoring and resource estimates");
  shor_cmd->require_subcommand(1);
  std::uint64_t sf_n = 15;
  int sf_attempts = 32;
  std::string sf_mode = "deferred";
  bool sf_no_shortcut = false;
  {
    auto* sub = leaf(shor_cmd, "factor", "Factor a small odd composite");
    sub->add_option("--n", sf_n, "Number to factor")->capture_default_str();
    sub->add_option("--attempts", sf_attempts, "Attempt budget")->capture_default_str();
    sub->add_option("--mode", sf_mode, "deferred or right-first measurement")
        ->check(CLI::IsMember({"deferred", "right-first"}))
        ->capture_default_str();
    sub->add_flag("--no-shortcut", sf_no_shortcut, "Redraw bases sharing a factor with N");
    handlers[sub] = [&, sub] {
      if (commons[sub]->reference_examples) return check_table(shor_checks());
      shor::FactoringOptions fo;
      fo.max_attempts = sf_attempts;
      fo.mode = sf_mode == "right-first" ? shor::MeasurementMode::right_first : shor::MeasurementMode::deferred;
      fo.allow_shortcut = !sf_no_shortcut;
      const auto out = shor::factor(sf_n, commons[sub]->seed, fo);
      auto opt = [](const std::optional<std::uint64_t>& v) { return v ? json(*v) : json(nullptr); };
      json attempts = json::array();
      for (const auto& a : out.attempts)
        attempts.push_back({{"base", a.base},
                            {"shortcut", a.shortcut},
                            {"measured", opt(a.measured)},
                            {"right_value", opt(a.right_value)},
                            {"order", opt(a.order)},
                            {"candidate_a", opt(a.root)},
                            {"factors", a.factors},
                            {"result", a.result}});
      if (!out.success)
        throw CommandFailure("no factor found within " + std::to_string(sf_attempts) + " attempts",
                             kNumerical, {{"modulus", sf_n}, {"attempts", attempts}});
      std::uint64_t product = 1;
      for (auto f : out.factors) product *= f;
      Payload p;
      p.result = {{"modulus", out.modulus},
                  {"base", out.base},
                  {"measured", opt(out.measured)},
                  {"order", opt(out.order)},
                  {"candidate_a", opt(out.root)},
                  {"factors", out.factors},
                  {"verified", product == out.modulus},
                  {"attempts", attempts}};
      p.csv_header = {"attempt", "base", "measured", "order", "result"};
      for (std::size_t i = 0; i < out.attempts.size(); ++i) {
        const auto& a = out.attempts[i];
        auto s = [](const std::optional<std::uint64_t>& v) { return v ? std::to_string(*v) : ""; };
        p.csv_rows.push_back({std::to_string(i + 1), std::to_string(a.base), s(a.measured), s(a.order), a.result});
      }
      return p;
    };
  }

  int se_bits = 430;
  double se_clock = 100, se_machines = 100, se_mips = 100;
  {
    auto* sub = leaf(shor_cmd, "estimate", "Quantum gate count against the NFS classical cost");
    sub->add_option("--bits", se_bits, "Bit length of the number")->capture_default_str();
    sub->add_option("--clock-mhz", se_clock, "Quantum gate rate (MHz)")->capture_default_str();
    sub->add_option("--machines", se_machines, "Classical fleet size")->capture_default_str();
    sub->add_option("--mips", se_mips, "MIPS per classical machine")->capture_default_str();
    handlers[sub] = [&, sub] {
      if (commons[sub]->reference_examples) return check_table(shor_checks());
      const auto est = shor::resource_estimate(se_bits, se_clock * 1e6);
      Payload p;
      p.result = {{"bits", est.bits},
                  {"gate_count", est.gate_count},
                  {"gate_count_note", "24 l^3 with the O(l^2) term omitted; a lower bound"},
                  {"qubit_count", est.qubit_count},
                  {"clock_mhz", se_clock},
                  {"wall_clock_s", est.wall_clock},
                  {"nfs_mips_years", est.nfs_mips_years},
                  {"nfs_calibration", "500 MIPS-years at 430 bits"}};
      if (se_bits >= 2)
        p.result["nfs_fleet"] = {{"machines", se_machines},
                                 {"mips_per_machine", se_mips},
                                 {"days", shor::nfs_days(est.nfs_mips_years, se_machines, se_mips)}};
      else
        p.result["nfs_fleet"] = nullptr;
      p.csv_header = {"quantity", "value"};
      p.csv_rows = {{"gate_count", std::to_string(est.gate_count)},
                    {"qubit_count", std::to_string(est.qubit_count)},
                    {"wall_clock_s", num(est.wall_clock)},
                    {"nfs_mips_years", num(est.nfs_mips_years)}};
      return p;
    };
  }

  int qd_qubits = 8;
  std::uint64_t qd_period = 4, qd_offset = 0;
  {
    auto* sub = leaf(shor_cmd, "qft-demo", "QFT of a periodic comb state", "csv");
    sub->add_option("--qubits", qd_qubits, "Register size")->capture_default_str();
    sub->add_option("--period", qd_period, "Comb period")->capture_default_str();
    sub->add_option("--offset", qd_offset, "Comb offset")->capture_default_str();
    handlers[sub] = [&, sub] {
      if (commons[sub]->reference_examples) return check_table(shor_checks());
      const auto reg = shor::qft_comb(qd_qubits, qd_period, qd_offset);
      const auto prob = reg.probabilities("left");
      Payload p;
      p.result["distribution"] = json::array();
      p.csv_header = {"value", "probability"};
      const double spacing = static_cast<double>(prob.size()) / static_cast<double>(qd_period);
      double peak_mass = 0.0;
      for (std::size_t v = 0; v < prob.size(); ++v) {
        p.result["distribution"].push_back({{"value", v}, {"probability", prob[v]}});
        p.csv_rows.push_back({std::to_string(v), num(prob[v])});
        const double j = static_cast<double>(v) / spacing;
        if (std::abs(j - std::round(j)) * spacing < 0.5) peak_mass += prob[v];
      }
      p.result["peak_spacing"] = spacing;
      p.result["peak_mass"] = peak_mass;
      return p;
    };
  }

  // parse and run ---------------------------------------------------------------
  std::string command;
  const CLI::App* active = nullptr;
  try {
    merge_config(args);
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
    for (const auto& [sub, fn] : handlers)
      if (sub->parsed()) active = sub;
    if (!active) throw CLI::RequiredError("a subcommand");
    command = active->get_parent() == &app ? active->get_name()
                                          : active->get_parent()->get_name() + " " + active->get_name();
    Payload p = handlers.at(active)();
    Common& c = *commons.at(active);
    const json config = resolved_config(*active);
    std::string body;
    if (c.format == "csv") {
      body = render_csv(p, command, config);
    } else {
      json doc = {{"version", kVersion}, {"command", command}, {"config", config}, {"result", p.result}};
      body = doc.dump(2) + "\n";
    }
    if (c.output.empty()) {
      out << body;
    } else {
      std::filesystem::path path(c.output);
      const char* dir = std::getenv(kOutputDirEnv);
      if (path.is_relative() && dir && *dir) path = std::filesystem::path(dir) / path;
      std::ofstream f(path, std::ios::binary);
      if (!f || !(f << body))
        throw CommandFailure("cannot write output file " + path.string(), kIo, json::object());
    }
    return p.exit_code;
  } catch (const CLI::CallForHelp&) {
    out << (active ? active->help() : app.help());
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << error_json("usage", e.what(), kUsage);
    return kUsage;
  } catch (const CommandFailure& e) {
    err << error_json("failure", e.what(), e.code(), e.details());
    return e.code();
  } catch (const shor::FactoringRejected& e) {
    err << error_json("rejected", e.what(), kInvalidInput, {{"reason", shor::to_string(e.reason())}});
    return kInvalidInput;
  } catch (const ConvergenceError& e) {
    err << error_json("convergence", e.what(), kNumerical, {{"residual", e.residual()}});
    return kNumerical;
  } catch (const InvalidArgument& e) {
    err << error_json("invalid_argument", e.what(), kInvalidInput);
    return kInvalidInput;
  } catch (const std::exception& e) {
    err << error_json("internal", e.what(), kNumerical);
    return kNumerical;
  }
}

inline int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  return dispatch(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace iontrap::cli

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

// Ideal-gate qubit register and the desk-scale Shor factoring pipeline,
// plus the gate-count and classical-cost comparison.
//
// Qubit q is bit q of the basis index. A segment is a run of consecutive
// qubits; its value reads those bits little-endian.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "iontrap/core_physics.hpp"
#include "iontrap/error.hpp"
#include "iontrap/pulse_sim.hpp"

namespace iontrap::shor {

using iontrap::Complex;

// ---------------------------------------------------------------------------
// Classical number theory

/// Euclid's algorithm.
inline std::uint64_t gcd(std::uint64_t a, std::uint64_t b) {
  detail::require(a != 0 || b != 0, "gcd(0, 0) is undefined");
  while (b != 0) {
    const std::uint64_t t = a % b;
    a = b;
    b = t;
  }
  return a;
}

/// x^e mod n by square-and-multiply.
inline std::uint64_t mod_pow(std::uint64_t x, std::uint64_t e, std::uint64_t n) {
  detail::require(n >= 1, "modulus must be positive");
  unsigned __int128 result = 1 % n;
  unsigned __int128 base = x % n;
  while (e > 0) {
    if (e & 1U) result = result * base % n;
    base = base * base % n;
    e >>= 1U;
  }
  return static_cast<std::uint64_t>(result);
}

inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

/// True when n = p^k for a prime p and k >= 2.
inline bool is_prime_power(std::uint64_t n) {
  if (n < 4) return false;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    if (n % p != 0) continue;
    while (n % p == 0) n /= p;
    return n == 1;
  }
  return false;
}

/// Number of bits needed to hold n.
inline int bit_length(std::uint64_t n) { return static_cast<int>(std::bit_width(n)); }

// ---------------------------------------------------------------------------
// Register

struct Segment {
  std::string name;
  int offset = 0;
  int count = 0;

  std::uint64_t mask() const {
    return ((std::uint64_t{1} << count) - 1) << offset;
  }
  std::uint64_t value(std::uint64_t index) const {
    return (index >> offset) & ((std::uint64_t{1} << count) - 1);
  }
  std::uint64_t with_value(std::uint64_t index, std::uint64_t v) const {
    return (index & ~mask()) | (v << offset);
  }
};

class NotCoprimeError : public InvalidArgument {
 public:
  NotCoprimeError(std::uint64_t x, std::uint64_t n, std::uint64_t g)
      : InvalidArgument("base " + std::to_string(x) + " shares factor " +
                        std::to_string(g) + " with " + std::to_string(n)),
        gcd_(g) {}
  std::uint64_t gcd() const noexcept { return gcd_; }

 private:
  std::uint64_t gcd_;
};

class QubitRegister {
 public:
  static constexpr int kMaxQubits = 22;

  /// Segments are laid out consecutively from qubit 0 in the given order.
  explicit QubitRegister(const std::vector<std::pair<std::string, int>>& layout) {
    int offset = 0;
    for (const auto& [name, count] : layout) {
      detail::require(count >= 0, "segment size must not be negative");
      segments_.push_back({name, offset, count});
      offset += count;
    }
    detail::require(offset >= 1, "register needs at least one qubit");
    detail::require(offset <= kMaxQubits,
                    "register of " + std::to_string(offset) + " qubits exceeds the cap of " +
                        std::to_string(kMaxQubits));
    qubits_ = offset;
    amps_.assign(std::size_t{1} << qubits_, Complex{});
    amps_[0] = 1.0;
  }

  /// Left register of 2l qubits, right register of l qubits, plus ancillas.
  static QubitRegister shor_layout(int bits, int ancilla = 0) {
    return QubitRegister({{"left", 2 * bits}, {"right", bits}, {"ancilla", ancilla}});
  }

  int qubit_count() const { return qubits_; }
  std::size_t size() const { return amps_.size(); }
  const std::vector<Complex>& amplitudes() const { return amps_; }
  Complex& operator[](std::size_t i) { return amps_[i]; }
  const Complex& operator[](std::size_t i) const { return amps_[i]; }
  const std::vector<Segment>& segments() const { return segments_; }

  const Segment& segment(const std::string& name) const {
    for (const auto& s : segments_)
      if (s.name == name) return s;
    throw InvalidArgument("register has no segment '" + name + "'");
  }

  /// Replaces the state by a normalized copy of `amplitudes`.
  void set_amplitudes(std::vector<Complex> amplitudes) {
    detail::require(amplitudes.size() == amps_.size(), "amplitude count mismatch");
    amps_ = std::move(amplitudes);
    double n = norm();
    detail::require(n > 0.0, "cannot load the zero vector");
    for (auto& a : amps_) a /= n;
  }

  void set_basis(std::uint64_t index) {
    detail::require(index < amps_.size(), "basis index out of range");
    std::fill(amps_.begin(), amps_.end(), Complex{});
    amps_[index] = 1.0;
  }

  double norm() const {
    double s = 0.0;
    for (const auto& a : amps_) s += std::norm(a);
    return std::sqrt(s);
  }

  // Gates -------------------------------------------------------------------

  void x(int q) {
    check(q);
    const std::uint64_t bit = std::uint64_t{1} << q;
    for (std::uint64_t i = 0; i < amps_.size(); ++i)
      if (!(i & bit)) std::swap(amps_[i], amps_[i | bit]);
  }

  void hadamard(int q) {
    check(q);
    const std::uint64_t bit = std::uint64_t{1} << q;
    const double r = 1.0 / std::sqrt(2.0);
    for (std::uint64_t i = 0; i < amps_.size(); ++i) {
      if (i & bit) continue;
      const Complex a = amps_[i], b = amps_[i | bit];
      amps_[i] = r * (a + b);
      amps_[i | bit] = r * (a - b);
    }
  }

  void hadamard_all(const std::string& segment_name) {
    const auto& s = segment(segment_name);
    for (int q = s.offset; q < s.offset + s.count; ++q) hadamard(q);
  }

  void cnot(int control, int target) {
    check_distinct({control, target});
    const std::uint64_t c = std::uint64_t{1} << control, t = std::uint64_t{1} << target;
    for (std::uint64_t i = 0; i < amps_.size(); ++i)
      if ((i & c) && !(i & t)) std::swap(amps_[i], amps_[i | t]);
  }

  void ccnot(int control1, int control2, int target) {
    check_distinct({control1, control2, target});
    const std::uint64_t c = (std::uint64_t{1} << control1) | (std::uint64_t{1} << control2);
    const std::uint64_t t = std::uint64_t{1} << target;
    for (std::uint64_t i = 0; i < amps_.size(); ++i)
      if ((i & c) == c && !(i & t)) std::swap(amps_[i], amps_[i | t]);
  }

  /// diag(1, 1, 1, e^{i theta}) on qubits (a, b).
  void controlled_phase(int a, int b, double theta) {
    check_distinct({a, b});
    const std::uint64_t m = (std::uint64_t{1} << a) | (std::uint64_t{1} << b);
    const Complex ph = std::polar(1.0, theta);
    for (std::uint64_t i = 0; i < amps_.size(); ++i)
      if ((i & m) == m) amps_[i] *= ph;
  }

  void swap(int a, int b) {
    check_distinct({a, b});
    const std::uint64_t ba = std::uint64_t{1} << a, bb = std::uint64_t{1} << b;
    for (std::uint64_t i = 0; i < amps_.size(); ++i)
      if ((i & ba) && !(i & bb)) std::swap(amps_[i], amps_[(i & ~ba) | bb]);
  }

  /// One-bit adder: |a>|b>|0> -> |a>|a xor b>|a and b>, i.e. CNOT(a, b)
  /// after CCNOT(a, b, carry). Returns a warning when the carry qubit was
  /// not |0>, since the sum is then not the stated one.
  std::vector<std::string> add(int a, int b, int carry) {
    check_distinct({a, b, carry});
    std::vector<std::string> warnings;
    const double p1 = probability_one(carry);
    if (p1 > 1e-12)
      warnings.push_back("carry qubit not in |0> (P(1) = " + std::to_string(p1) + ")");
    ccnot(a, b, carry);
    cnot(a, b);
    return warnings;
  }

  /// |z>_left |y>_right -> |z>_left |y xor (x^z mod n)>_right. With the right
  /// register in |0> this writes f_x(z) = x^z mod n.
  void mod_exp(std::uint64_t base, std::uint64_t modulus,
               const std::string& left_name = "left",
               const std::string& right_name = "right") {
    detail::require(modulus >= 2, "modulus must be at least 2");
    const std::uint64_t g = gcd(base % modulus, modulus);
    if (g != 1) throw NotCoprimeError(base, modulus, g);
    const auto& left = segment(left_name);
    const auto& right = segment(right_name);
    detail::require(bit_length(modulus - 1) <= right.count,
                    "right register too small for the modulus");
    detail::require(left.count <= 24, "left register too large");
    std::vector<std::uint64_t> table(std::size_t{1} << left.count);
    for (std::uint64_t z = 0; z < table.size(); ++z) table[z] = mod_pow(base, z, modulus);
    std::vector<Complex> out(amps_.size());
    for (std::uint64_t i = 0; i < amps_.size(); ++i) {
      const std::uint64_t y = right.value(i) ^ table[left.value(i)];
      out[right.with_value(i, y)] = amps_[i];
    }
    amps_ = std::move(out);
  }

  /// |a> -> 2^{-k/2} sum_c exp(2 pi i a c / 2^k) |c> on the segment.
  void qft(const std::string& segment_name) { fourier(segment(segment_name), +1.0); }
  void inverse_qft(const std::string& segment_name) { fourier(segment(segment_name), -1.0); }

  double probability_one(int q) const {
    check(q);
    const std::uint64_t bit = std::uint64_t{1} << q;
    double p = 0.0;
    for (std::uint64_t i = 0; i < amps_.size(); ++i)
      if (i & bit) p += std::norm(amps_[i]);
    return p;
  }

  /// Marginal distribution of the segment value.
  std::vector<double> probabilities(const std::string& segment_name) const {
    const auto& s = segment(segment_name);
    std::vector<double> p(std::size_t{1} << s.count, 0.0);
    for (std::uint64_t i = 0; i < amps_.size(); ++i) p[s.value(i)] += std::norm(amps_[i]);
    return p;
  }

  /// Projective measurement of the segment; collapses the state.
  std::uint64_t measure(const std::string& segment_name, SeededUniform& rng) {
    const auto& s = segment(segment_name);
    const auto p = probabilities(segment_name);
    const double u = rng();
    double acc = 0.0;
    std::uint64_t outcome = p.size() - 1;
    for (std::uint64_t v = 0; v < p.size(); ++v) {
      if (p[v] == 0.0) continue;
      acc += p[v];
      if (u < acc) {
        outcome = v;
        break;
      }
    }
    while (p[outcome] == 0.0 && outcome > 0) --outcome;
    const double scale = 1.0 / std::sqrt(p[outcome]);
    for (std::uint64_t i = 0; i < amps_.size(); ++i)
      amps_[i] = s.value(i) == outcome ? amps_[i] * scale : Complex{};
    return outcome;
  }

 private:
  void check(int q) const {
    if (q < 0 || q >= qubits_)
      throw InvalidArgument("qubit " + std::to_string(q) + " out of range");
  }

  void check_distinct(std::initializer_list<int> qs) const {
    for (int q : qs) check(q);
    std::vector<int> v(qs);
    std::sort(v.begin(), v.end());
    if (std::adjacent_find(v.begin(), v.end()) != v.end())
      throw InvalidArgument("gate qubit indices must be distinct");
  }

  void fourier(const Segment& s, double sign) {
    const int k = s.count;
    auto q = [&](int j) { return s.offset + j; };
    if (sign > 0) {
      for (int i = k - 1; i >= 0; --i) {
        hadamard(q(i));
        for (int m = i - 1; m >= 0; --m)
          controlled_phase(q(m), q(i), kPi / static_cast<double>(std::uint64_t{1} << (i - m)));
      }
      for (int i = 0; i < k / 2; ++i) swap(q(i), q(k - 1 - i));
    } else {
      for (int i = 0; i < k / 2; ++i) swap(q(i), q(k - 1 - i));
      for (int i = 0; i < k; ++i) {
        for (int m = 0; m < i; ++m)
          controlled_phase(q(m), q(i), -kPi / static_cast<double>(std::uint64_t{1} << (i - m)));
        hadamard(q(i));
      }
    }
  }

  int qubits_ = 0;
  std::vector<Segment> segments_;
  std::vector<Complex> amps_;
};

// ---------------------------------------------------------------------------
// Order finding and factoring

/// Continued-fraction expansion of y / 2^k; returns the first convergent
/// denominator r < n with x^r = 1 mod n.
inline std::optional<std::uint64_t> extract_order(std::uint64_t y, int k, std::uint64_t n,
                                                  std::uint64_t x) {
  detail::require(k >= 1 && k < 63, "bit count out of range");
  const std::uint64_t q = std::uint64_t{1} << k;
  detail::require(y < q, "measured value out of range");
  detail::require(n >= 2, "modulus must be at least 2");
  if (y == 0) return std::nullopt;
  std::uint64_t num = y, den = q;
  std::uint64_t k_prev = 0, k_prev2 = 1;  // convergent denominators
  while (den != 0) {
    const std::uint64_t a = num / den;
    const std::uint64_t kd = a * k_prev + k_prev2;
    if (kd >= n) break;
    if (kd >= 1 && mod_pow(x, kd, n) == 1) return kd;
    k_prev2 = k_prev;
    k_prev = kd;
    const std::uint64_t rem = num % den;
    num = den;
    den = rem;
  }
  return std::nullopt;
}

enum class MeasurementMode { deferred, right_first };

enum class RejectReason { too_small, even, prime, prime_power, too_large };

inline std::string to_string(RejectReason r) {
  switch (r) {
    case RejectReason::too_small: return "too_small";
    case RejectReason::even: return "even";
    case RejectReason::prime: return "prime";
    case RejectReason::prime_power: return "prime_power";
    case RejectReason::too_large: return "too_large";
  }
  return "?";
}

class FactoringRejected : public InvalidArgument {
 public:
  FactoringRejected(std::uint64_t n, RejectReason reason)
      : InvalidArgument("cannot factor " + std::to_string(n) + ": " + to_string(reason)),
        reason_(reason) {}
  RejectReason reason() const noexcept { return reason_; }

 private:
  RejectReason reason_;
};

struct Attempt {
  std::uint64_t base = 0;
  bool shortcut = false;  // gcd(x, N) > 1 gave a factor directly
  std::optional<std::uint64_t> measured;
  std::optional<std::uint64_t> right_value;  // right_first mode only
  std::optional<std::uint64_t> order;
  std::optional<std::uint64_t> root;  // x^{r/2} mod N
  std::set<std::uint64_t> factors;
  std::string result;
};

struct FactoringOutcome {
  std::uint64_t modulus = 0;
  bool success = false;
  std::uint64_t base = 0;
  std::optional<std::uint64_t> measured;
  std::optional<std::uint64_t> order;
  std::optional<std::uint64_t> root;
  std::set<std::uint64_t> factors;
  std::vector<Attempt> attempts;
};

struct FactoringOptions {
  int max_attempts = 32;
  MeasurementMode mode = MeasurementMode::deferred;
  /// When false, bases sharing a factor with N are redrawn instead of
  /// returning the gcd, so every success goes through order finding.
  bool allow_shortcut = true;
};

inline void check_factorable(std::uint64_t n) {
  if (n < 4) throw FactoringRejected(n, RejectReason::too_small);
  if (n % 2 == 0) throw FactoringRejected(n, RejectReason::even);
  if (is_prime(n)) throw FactoringRejected(n, RejectReason::prime);
  if (is_prime_power(n)) throw FactoringRejected(n, RejectReason::prime_power);
  if (3 * bit_length(n) > QubitRegister::kMaxQubits)
    throw FactoringRejected(n, RejectReason::too_large);
}

/// One quantum order-finding run for base x: returns the measured left
/// register value (and the right value in right_first mode).
inline std::pair<std::uint64_t, std::optional<std::uint64_t>> order_finding_run(
    std::uint64_t n, std::uint64_t x, MeasurementMode mode, SeededUniform& rng) {
  auto reg = QubitRegister::shor_layout(bit_length(n));
  reg.hadamard_all("left");
  reg.mod_exp(x, n);
  std::optional<std::uint64_t> right;
  if (mode == MeasurementMode::right_first) right = reg.measure("right", rng);
  reg.qft("left");
  return {reg.measure("left", rng), right};
}

/// Shor's algorithm for a small odd composite N, deterministic in the seed.
inline FactoringOutcome factor(std::uint64_t n, std::uint64_t seed,
                               const FactoringOptions& opts = {}) {
  check_factorable(n);
  detail::require(opts.max_attempts >= 1, "attempt budget must be at least 1");
  SeededUniform rng(seed);
  FactoringOutcome out;
  out.modulus = n;
  const int k = 2 * bit_length(n);

  int attempts = 0;
  while (attempts < opts.max_attempts) {
    Attempt at;
    at.base = 2 + rng.raw() % (n - 3);
    const std::uint64_t g = gcd(at.base, n);
    if (g != 1) {
      if (!opts.allow_shortcut) continue;
      ++attempts;
      at.shortcut = true;
      at.factors = {g, n / g};
      at.result = "gcd shortcut";
    } else {
      ++attempts;
      const auto [y, right] = order_finding_run(n, at.base, opts.mode, rng);
      at.measured = y;
      at.right_value = right;
      at.order = extract_order(y, k, n, at.base);
      if (!at.order) {
        at.result = "no order from continued fractions";
      } else if (*at.order % 2 != 0) {
        at.result = "odd order";
      } else {
        at.root = mod_pow(at.base, *at.order / 2, n);
        if (*at.root == n - 1) {
          at.result = "trivial square root";
        } else {
          for (std::uint64_t c : {gcd(*at.root + n - 1, n), gcd(*at.root + 1, n)})
            if (c != 1 && c != n) at.factors.insert(c);
          at.result = at.factors.empty() ? "trivial factors" : "factored";
          if (!at.factors.empty()) {
            const std::uint64_t p = *at.factors.begin();
            at.factors = {p, n / p};
          }
        }
      }
    }
    out.attempts.push_back(at);
    if (!at.factors.empty()) {
      out.success = true;
      out.base = at.base;
      out.measured = at.measured;
      out.order = at.order;
      out.root = at.root;
      out.factors = at.factors;
      return out;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Resource comparison

inline constexpr double kNfsExponentConstant = 1.923;
inline constexpr double kNfsReferenceBits = 430.0;      // RSA130
inline constexpr double kNfsReferenceMipsYears = 500.0;

inline double nfs_growth(double bits) {
  return kNfsExponentConstant * std::cbrt(bits) * std::pow(std::log(bits), 2.0 / 3.0);
}

/// Heuristic NFS cost in MIPS-years, calibrated to 500 MIPS-years at 430 bits.
inline double nfs_cost(int bits) {
  detail::require(bits >= 2, "NFS cost needs at least 2 bits");
  return kNfsReferenceMipsYears *
         std::exp(nfs_growth(static_cast<double>(bits)) - nfs_growth(kNfsReferenceBits));
}

/// Wall-clock days for a MIPS-years budget on `machines` machines of `mips`
/// MIPS each.
inline double nfs_days(double mips_years, double machines, double mips) {
  detail::require(machines > 0.0 && mips > 0.0, "fleet size and rating must be positive");
  return mips_years / (machines * mips) * 365.25;
}

struct ResourceEstimate {
  int bits = 0;
  std::uint64_t gate_count = 0;  // 24 l^3; the O(l^2) term is omitted
  int qubit_count = 0;           // 5 l + 4
  double clock_hz = 0.0;
  double wall_clock = 0.0;       // s
  double nfs_mips_years = 0.0;
};

inline ResourceEstimate resource_estimate(int bits, double clock_hz) {
  detail::require(bits >= 1, "bit count must be at least 1");
  detail::require(clock_hz > 0.0, "clock rate must be positive");
  ResourceEstimate r;
  r.bits = bits;
  const auto l = static_cast<std::uint64_t>(bits);
  r.gate_count = 24 * l * l * l;
  r.qubit_count = 5 * bits + 4;
  r.clock_hz = clock_hz;
  r.wall_clock = static_cast<double>(r.gate_count) / clock_hz;
  r.nfs_mips_years = bits >= 2 ? nfs_cost(bits) : 0.0;
  return r;
}

// ---------------------------------------------------------------------------
// QFT demo

/// Register of `qubits` holding the normalized comb sum_j |offset + j period>,
/// after the QFT.
inline QubitRegister qft_comb(int qubits, std::uint64_t period, std::uint64_t offset = 0) {
  detail::require(period >= 1, "period must be at least 1");
  QubitRegister reg({{"left", qubits}});
  detail::require(offset < reg.size(), "offset outside the register");
  std::vector<Complex> amps(reg.size());
  for (std::uint64_t v = offset; v < reg.size(); v += period) amps[v] = 1.0;
  reg.set_amplitudes(std::move(amps));
  reg.qft("left");
  return reg;
}

}  // namespace iontrap::shor

/*
 * classical_pm.hpp - the classical sinusoidal phase modulator in the frequency
 * domain.
 *
 * A drive V_m cos(Omega t + theta) on a modulator with half-wave voltage V_pi
 * gives modulation index m = pi V_m / V_pi. By Jacobi-Anger, a carrier leaves
 * the device as a comb of sidebands with amplitudes
 *
 *     C_q = e^{j phi_b} (j e^{j theta})^q J_q(m),     q in Z,
 *
 * and the inverse device has coefficients C~_q = conj(C_{-q}). A multimode
 * input alpha_n (offsets in units of the tone step) is reshuffled as
 * out_q = sum_n C_{q-n} alpha_n.
 *
 * Offsets here are carrier-relative signed integers: this is also the naive
 * quantum operator, which happily addresses non-positive frequencies.
 */

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <vector>

#include "eopm/bessel.hpp"
#include "eopm/errors.hpp"

namespace eopm {

using cplx = std::complex<double>;

/// Reduces an angle to (-pi, pi].
inline double reduce_angle(double a) {
  double r = std::remainder(a, 2.0 * std::numbers::pi);
  if (r <= -std::numbers::pi) r += 2.0 * std::numbers::pi;
  return r;
}

struct ModulationTone {
  double m = 0.0;
  double theta = 0.0;
  std::int64_t step = 1;

  /// Validated tone with theta stored in (-pi, pi].
  static ModulationTone make(double m, double theta, std::int64_t step) {
    if (!(m >= 0.0) || !std::isfinite(m)) throw DomainError("modulation index must be >= 0");
    if (step < 1) throw DomainError("frequency step N must be >= 1");
    if (!std::isfinite(theta)) throw DomainError("tone phase must be finite");
    return {m, reduce_angle(theta), step};
  }

  [[nodiscard]] cplx chi() const { return std::polar(0.5 * m, theta); }
};

struct ModulatorSpec {
  ModulationTone tone;
  double phi_b = 0.0;

  static ModulatorSpec make(double m, double theta, std::int64_t step, double phi_b) {
    if (!std::isfinite(phi_b)) throw DomainError("bias phase must be finite");
    return {ModulationTone::make(m, theta, step), reduce_angle(phi_b)};
  }
};

/// Half-width of the sideband window kept beyond Carson's rule.
inline constexpr int kDefaultSafety = 40;

inline double modulation_index(double v_m, double v_pi) {
  if (!(v_pi > 0.0)) throw DomainError("V_pi must be > 0");
  if (!(v_m >= 0.0)) throw DomainError("V_m must be >= 0");
  return std::numbers::pi * v_m / v_pi;
}

/// ceil(m) + 1 + safety.
inline int carson_window(double m, int safety = kDefaultSafety) {
  if (!(m >= 0.0)) throw DomainError("modulation index must be >= 0");
  if (safety < 0) throw DomainError("safety margin must be >= 0");
  return static_cast<int>(std::ceil(m)) + 1 + safety;
}

namespace detail {

inline cplx j_power(std::int64_t k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

}  // namespace detail

/// e^{j phi_b} (j e^{j theta})^k, the phase attached to a k-step shift.
inline cplx sideband_phase(std::int64_t k, const ModulatorSpec& spec) {
  return detail::j_power(k) *
         std::polar(1.0, spec.phi_b + static_cast<double>(k) * spec.tone.theta);
}

inline cplx coefficient(std::int64_t q, const ModulatorSpec& spec) {
  return sideband_phase(q, spec) * bessel_j(q, spec.tone.m);
}

inline cplx inverse_coefficient(std::int64_t q, const ModulatorSpec& spec) {
  return std::conj(coefficient(-q, spec));
}

struct SidebandCoefficients {
  int q_min = 0;
  int q_max = 0;
  std::vector<cplx> values;
  double tail_bound = 0.0;  // sum of |C_q|^2 outside [q_min, q_max]

  [[nodiscard]] cplx at(std::int64_t q) const {
    if (q < q_min || q > q_max) return {};
    return values[static_cast<std::size_t>(q - q_min)];
  }
};

/// C_q for |q| <= half_width, evaluated from a single Bessel row.
inline SidebandCoefficients sideband_coefficients(const ModulatorSpec& spec, int half_width) {
  if (half_width < 0) throw DomainError("window half-width must be >= 0");
  const int extra = carson_window(spec.tone.m, kDefaultSafety);
  const BesselRow row = bessel_row(spec.tone.m, half_width + extra);
  SidebandCoefficients out;
  out.q_min = -half_width;
  out.q_max = half_width;
  out.values.reserve(static_cast<std::size_t>(2 * half_width + 1));
  for (int q = -half_width; q <= half_width; ++q) {
    out.values.push_back(sideband_phase(q, spec) * row.at(q));
  }
  double tail = 0.0;
  for (int q = half_width + 1; q <= half_width + extra; ++q) tail += 2.0 * row.at(q) * row.at(q);
  out.tail_bound = tail;
  return out;
}

using OffsetField = std::map<std::int64_t, cplx>;

namespace detail {

inline OffsetField convolve(const OffsetField& alpha, const SidebandCoefficients& c) {
  OffsetField out;
  for (const auto& [n, a] : alpha) {
    for (int q = c.q_min; q <= c.q_max; ++q) {
      const cplx v = c.values[static_cast<std::size_t>(q - c.q_min)];
      if (v == cplx{}) continue;
      out[n + q] += v * a;
    }
  }
  return out;
}

}  // namespace detail

/// out[q] = sum_n C_{q-n} alpha[n], with C truncated to |q - n| <= q_window.
inline OffsetField convolve_multimode(const OffsetField& alpha, const ModulatorSpec& spec, int q_window) {
  return detail::convolve(alpha, sideband_coefficients(spec, q_window));
}

/// Same reshuffle with the inverse coefficients C~_q = conj(C_{-q}).
inline OffsetField convolve_inverse(const OffsetField& alpha, const ModulatorSpec& spec, int q_window) {
  SidebandCoefficients c = sideband_coefficients(spec, q_window);
  std::vector<cplx> inv(c.values.size());
  for (int q = c.q_min; q <= c.q_max; ++q) {
    inv[static_cast<std::size_t>(q - c.q_min)] = std::conj(c.at(-q));
  }
  c.values = std::move(inv);
  return detail::convolve(alpha, c);
}

}  // namespace eopm

/*
 * multitone.hpp - modulation by a sum of sinusoidal tones.
 *
 * The exact operator is exp(j phi_b N_ph) exp(sum_i X_i), one generator term
 * per tone. Three approximations are provided next to the exact reference:
 *
 *   two_tone_spectrum        exp(X_1) exp(X_2): tone 2 acts first, then tone 1,
 *                            each through the positive-frequency D matrix.
 *   multitone_large_carrier  product of classical coefficients, valid when the
 *                            carrier sits far above every reachable sideband.
 *   multitone_small_m        carrier plus first-order sidebands only.
 *
 * Whenever several index tuples land on the same output mode their amplitudes
 * are added.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numeric>
#include <vector>

#include "eopm/classical_pm.hpp"
#include "eopm/errors.hpp"
#include "eopm/modes.hpp"
#include "eopm/oracle.hpp"
#include "eopm/scattering.hpp"

namespace eopm {

struct ToneSet {
  std::vector<ModulationTone> tones;
  double phi_b = 0.0;

  static ToneSet make(std::vector<ModulationTone> tones, double phi_b) {
    if (tones.empty()) throw DomainError("tone set must not be empty");
    if (!std::isfinite(phi_b)) throw DomainError("bias phase must be finite");
    for (auto& t : tones) t = ModulationTone::make(t.m, t.theta, t.step);
    return {std::move(tones), reduce_angle(phi_b)};
  }

  [[nodiscard]] double max_index() const {
    double m = 0.0;
    for (const auto& t : tones) m = std::max(m, t.m);
    return m;
  }

  /// gcd of all frequency steps, the natural unit for offsets.
  [[nodiscard]] std::int64_t step_gcd() const {
    std::int64_t g = 0;
    for (const auto& t : tones) g = std::gcd(g, t.step);
    return g;
  }
};

/// Largest modulation index accepted by multitone_small_m.
inline constexpr double kSmallIndexLimit = 0.2;

namespace detail {

inline std::vector<SpectrumLine> to_lines(const std::map<std::int64_t, cplx>& field) {
  std::vector<SpectrumLine> out;
  out.reserve(field.size());
  for (const auto& [mode, a] : field) {
    if (a == cplx{}) continue;
    out.push_back({ModeIndex(mode), a, std::norm(a)});
  }
  return out;
}

inline ModulatorSpec unbiased(const ModulationTone& t) { return {t, 0.0}; }

}  // namespace detail

inline std::vector<SpectrumLine> two_tone_spectrum(ModeIndex n0, const ToneSet& tones, double tail_tol) {
  if (tones.tones.size() != 2) throw DomainError("two_tone_spectrum needs exactly two tones");
  const ModulatorSpec first = detail::unbiased(tones.tones[1]);
  const ModulatorSpec second = detail::unbiased(tones.tones[0]);
  const cplx bias = std::polar(1.0, tones.phi_b);

  std::map<std::int64_t, cplx> field;
  for (const SpectrumLine& a : scatter_single_photon(n0, first, tail_tol)) {
    for (const SpectrumLine& b : scatter_single_photon(a.mode, second, tail_tol)) {
      field[b.mode.value()] += a.amplitude * b.amplitude;
    }
  }
  for (auto& kv : field) kv.second *= bias;
  return detail::to_lines(field);
}

inline std::vector<SpectrumLine> multitone_large_carrier(ModeIndex n0, const ToneSet& tones, int q_window_per_tone) {
  if (q_window_per_tone < 0) throw DomainError("window per tone must be >= 0");
  std::int64_t reach = 0;
  for (const auto& t : tones.tones) {
    if (t.m > 0.0) reach += static_cast<std::int64_t>(q_window_per_tone) * t.step;
  }
  if (n0.value() - reach < 1) {
    throw UnphysicalMode("large-carrier expansion reaches mode " + std::to_string(n0.value() - reach));
  }

  std::map<std::int64_t, cplx> field{{n0.value(), std::polar(1.0, tones.phi_b)}};
  for (const auto& t : tones.tones) {
    if (t.m == 0.0) continue;
    const SidebandCoefficients c = sideband_coefficients(detail::unbiased(t), q_window_per_tone);
    std::map<std::int64_t, cplx> next;
    for (const auto& [mode, a] : field) {
      for (int q = c.q_min; q <= c.q_max; ++q) {
        const cplx v = c.at(q);
        if (v == cplx{}) continue;
        next[mode + q * t.step] += a * v;
      }
    }
    field = std::move(next);
  }
  return detail::to_lines(field);
}

inline std::vector<SpectrumLine> multitone_small_m(ModeIndex n0, const ToneSet& tones) {
  std::int64_t max_step = 0;
  for (const auto& t : tones.tones) {
    if (t.m > kSmallIndexLimit) throw DomainError("small-index model needs every m <= 0.2");
    max_step = std::max(max_step, t.step);
  }
  if (n0.value() <= max_step) throw DomainError("small-index model needs n0 > max N");

  const cplx bias = std::polar(1.0, tones.phi_b);
  const cplx j{0.0, 1.0};
  std::vector<double> j0;
  for (const auto& t : tones.tones) j0.push_back(bessel_j(0, t.m));

  std::map<std::int64_t, cplx> field;
  double carrier = 1.0;
  for (double v : j0) carrier *= v;
  field[n0.value()] += bias * carrier;
  for (std::size_t k = 0; k < tones.tones.size(); ++k) {
    const auto& t = tones.tones[k];
    if (t.m == 0.0) continue;
    double others = 1.0;
    for (std::size_t i = 0; i < j0.size(); ++i) {
      if (i != k) others *= j0[i];
    }
    const double amp = 0.5 * t.m * others;
    field[n0.value() + t.step] += bias * j * std::polar(amp, t.theta);
    field[n0.value() - t.step] += bias * j * std::polar(amp, -t.theta);
  }
  return detail::to_lines(field);
}

/// Smallest window accepted by combined_oracle.
inline std::int64_t combined_oracle_window(ModeIndex n0, const ToneSet& tones) {
  std::int64_t w = n0.value();
  for (const auto& t : tones.tones) w += t.step * carson_window(t.m, kDefaultSafety);
  return w;
}

/// Column n0 of exp(j (sum_i G_i + phi_b 1)) over modes 1..m_max.
inline std::vector<cplx> combined_oracle(ModeIndex n0, const ToneSet& tones, std::int64_t m_max) {
  if (m_max < combined_oracle_window(n0, tones)) {
    throw DomainError("M_max too small for the combined oracle window");
  }
  std::int64_t max_step = 0;
  std::int64_t edge = 0;
  for (const auto& t : tones.tones) {
    max_step = std::max(max_step, t.step);
    edge += t.step * carson_window(t.m, 5);
  }
  if (m_max <= max_step) throw DomainError("M_max must exceed every frequency step");
  GeneratorMatrix g{m_max, ComplexMatrix::Zero(m_max, m_max)};
  for (const auto& t : tones.tones) detail::add_tone(g.entries, t);
  g.entries.diagonal().array() += cplx{tones.phi_b, 0.0};
  return detail::checked_column(exponentiate(g), n0.value(), edge);
}

/// max over modes of |line amplitude - oracle amplitude|; modes missing on either side count as zero.
inline double max_oracle_deviation(const std::vector<SpectrumLine>& lines, const std::vector<cplx>& oracle) {
  std::vector<cplx> approx(oracle.size());
  double dev = 0.0;
  for (const auto& l : lines) {
    const auto idx = static_cast<std::size_t>(l.mode.value() - 1);
    if (idx < approx.size()) {
      approx[idx] += l.amplitude;
    } else {
      dev = std::max(dev, std::abs(l.amplitude));
    }
  }
  for (std::size_t i = 0; i < oracle.size(); ++i) dev = std::max(dev, std::abs(approx[i] - oracle[i]));
  return dev;
}

}  // namespace eopm

/*
 * scattering.hpp - the positive-frequency scattering operator.
 *
 * Restricting the generator to modes n >= 1 turns the ladder reached from an
 * input n0 = q0 N - r0 into a half-infinite chain q = 1, 2, ... (mode q N - r0)
 * with a hard wall at q = 0. Reflecting the unrestricted amplitudes off that
 * wall gives the one-photon transition amplitudes
 *
 *   D_{q,q0} = e^{j phi_b} (j e^{j theta})^{q-q0} [ J_{q-q0}(m) - (-1)^{q0} J_{q+q0}(m) ],  q >= 1,
 *
 * and D_{q,q0} = 0 for q <= 0. The matrix D is unitary on each residue class.
 * Coherent inputs transform linearly through the same matrix, class by class.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <thread>
#include <vector>

#include "eopm/bessel.hpp"
#include "eopm/classical_pm.hpp"
#include "eopm/errors.hpp"
#include "eopm/modes.hpp"

namespace eopm {

struct SpectrumLine {
  ModeIndex mode;
  cplx amplitude;
  double probability;
};

struct QuantumTransitionRow {
  std::int64_t q0 = 1;
  std::int64_t r0 = 0;
  std::vector<std::pair<std::int64_t, cplx>> entries;  // (q, D_{q,q0}), q ascending from 1
  double tail_bound = 0.0;
};

/// Largest admissible discarded probability for the one-photon spectra.
inline constexpr double kMaxTailTolerance = 1e-6;

namespace detail {

inline double reflected_bracket(const BesselRow& row, std::int64_t q, std::int64_t q0) {
  const double image = (q0 & 1) ? -row.at(q + q0) : row.at(q + q0);
  return row.at(q - q0) - image;
}

inline void check_tail_tol(double tail_tol) {
  if (!(tail_tol > 0.0) || tail_tol > kMaxTailTolerance) {
    throw DomainError("tail tolerance must lie in (0, 1e-6]");
  }
}

}  // namespace detail

inline cplx d_coefficient(std::int64_t q, std::int64_t q0, const ModulatorSpec& spec) {
  if (q0 < 1) throw DomainError("input ladder index q0 must be >= 1");
  if (q <= 0) return {};
  const double m = spec.tone.m;
  const double image = bessel_j(q + q0, m);
  const double bracket = bessel_j(q - q0, m) - ((q0 & 1) ? -image : image);
  return sideband_phase(q - q0, spec) * bracket;
}

/// Column q0 of D on ladder r0, grown until the discarded probability is below tail_tol.
inline QuantumTransitionRow transition_row(std::int64_t q0, std::int64_t r0, const ModulatorSpec& spec,
                                           double tail_tol) {
  if (q0 < 1) throw DomainError("input ladder index q0 must be >= 1");
  detail::check_tail_tol(tail_tol);
  const double m = spec.tone.m;
  std::int64_t q_max = carson_window(m, 20) + q0;
  for (;;) {
    // The probe window past q_max is as long as the kept one; beyond it the
    // Bessel terms fall off faster than geometrically.
    const std::int64_t probe_end = 2 * q_max + 40;
    const BesselRow row = bessel_row(m, static_cast<int>(probe_end + q0));
    double tail = 0.0;
    for (std::int64_t q = q_max + 1; q <= probe_end; ++q) {
      const double b = detail::reflected_bracket(row, q, q0);
      tail += b * b;
    }
    if (tail <= tail_tol) {
      QuantumTransitionRow out{q0, r0, {}, tail};
      out.entries.reserve(static_cast<std::size_t>(q_max));
      for (std::int64_t q = 1; q <= q_max; ++q) {
        out.entries.emplace_back(q, sideband_phase(q - q0, spec) * detail::reflected_bracket(row, q, q0));
      }
      return out;
    }
    q_max *= 2;
  }
}

/// Output spectrum of a single photon in mode n0; lines with exactly zero amplitude are dropped.
inline std::vector<SpectrumLine> scatter_single_photon(ModeIndex n0, const ModulatorSpec& spec, double tail_tol) {
  const std::int64_t step = spec.tone.step;
  const auto [q0, r0] = decompose(n0, step);
  const QuantumTransitionRow row = transition_row(q0, r0, spec, tail_tol);
  std::vector<SpectrumLine> lines;
  for (const auto& [q, amp] : row.entries) {
    if (amp == cplx{}) continue;
    lines.push_back({ModeIndex(q * step - r0), amp, std::norm(amp)});
  }
  return lines;
}

using ModeField = std::map<ModeIndex, cplx>;

/// Linear canonical transformation of a multimode coherent amplitude set.
///
/// Residue classes never mix, so they are processed independently (and in
/// parallel when threads > 1). Inside a class the sum runs over inputs in
/// ascending mode order, which fixes the floating-point result.
inline ModeField scatter_coherent(const ModeField& alpha, const ModulatorSpec& spec, double tail_tol,
                                  unsigned threads = 1) {
  detail::check_tail_tol(tail_tol);
  const std::int64_t step = spec.tone.step;
  std::map<std::int64_t, std::vector<std::pair<std::int64_t, cplx>>> classes;  // r0 -> (q0, alpha)
  for (const auto& [mode, a] : alpha) {
    const auto [q0, r0] = decompose(mode, step);
    classes[r0].emplace_back(q0, a);
  }

  std::vector<std::int64_t> keys;
  for (const auto& kv : classes) keys.push_back(kv.first);
  std::vector<std::map<std::int64_t, cplx>> results(keys.size());

  auto work = [&](std::size_t i) {
    auto& acc = results[i];
    for (const auto& [q0, a] : classes.at(keys[i])) {
      const QuantumTransitionRow row = transition_row(q0, keys[i], spec, tail_tol);
      for (const auto& [q, d] : row.entries) {
        if (d == cplx{}) continue;
        acc[q] += d * a;
      }
    }
  };

  const unsigned n_workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(keys.size())));
  if (n_workers <= 1) {
    for (std::size_t i = 0; i < keys.size(); ++i) work(i);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < n_workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < keys.size(); i += n_workers) work(i);
      });
    }
  }

  ModeField out;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    for (const auto& [q, v] : results[i]) out.emplace(ModeIndex(q * step - keys[i]), v);
  }
  return out;
}

/// |sum_{q=1}^{q_max} conj(D_{q,p0}) D_{q,q0} - delta_{p0,q0}|.
inline double unitarity_defect(std::int64_t p0, std::int64_t q0, const ModulatorSpec& spec, std::int64_t q_max) {
  if (p0 < 1 || q0 < 1) throw DomainError("p0 and q0 must be >= 1");
  if (q_max < carson_window(spec.tone.m, kDefaultSafety) + std::max(p0, q0)) {
    throw DomainError("q_max too small for the unitarity sum");
  }
  const BesselRow row = bessel_row(spec.tone.m, static_cast<int>(q_max + std::max(p0, q0)));
  cplx sum{};
  for (std::int64_t q = 1; q <= q_max; ++q) {
    const cplx dp = sideband_phase(q - p0, spec) * detail::reflected_bracket(row, q, p0);
    const cplx dq = sideband_phase(q - q0, spec) * detail::reflected_bracket(row, q, q0);
    sum += std::conj(dp) * dq;
  }
  return std::abs(sum - (p0 == q0 ? 1.0 : 0.0));
}

struct NaiveLine {
  std::int64_t mode;  // may be <= 0
  cplx amplitude;
  bool physical;
};

/// Unrestricted sidebands C_q at n0 + q N, |q| <= q_window, zero amplitudes dropped.
inline std::vector<NaiveLine> naive_scatter_single_photon(ModeIndex n0, const ModulatorSpec& spec, int q_window) {
  if (q_window < carson_window(spec.tone.m, 0)) {
    throw DomainError("q_window must cover Carson's rule");
  }
  const SidebandCoefficients c = sideband_coefficients(spec, q_window);
  std::vector<NaiveLine> lines;
  for (int q = c.q_min; q <= c.q_max; ++q) {
    const cplx a = c.at(q);
    if (a == cplx{}) continue;
    const std::int64_t mode = n0.value() + q * spec.tone.step;
    lines.push_back({mode, a, mode >= 1});
  }
  return lines;
}

}  // namespace eopm

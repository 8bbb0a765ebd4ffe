/*
 * bessel.hpp - integer-order Bessel functions of the first kind, J_q(m).
 *
 * Two evaluation paths:
 *
 *   ascending series   J_q(m) = (m/2)^q sum_s (-(m/2)^2)^s / (s! (q+s)!)
 *                      used for m <= 2 and whenever (m/2)^2 <= q + 1, where
 *                      the terms shrink from the start and nothing cancels.
 *
 *   Miller recurrence  f_{k-1} = (2k/m) f_k - f_{k+1}, started well above
 *                      max(q, m) with f = (0, tiny) and normalised with
 *                      J_0^2 + 2 sum_k J_k^2 = 1. The sign comes from
 *                      J_0 + 2 sum_k J_2k = 1.
 *
 * Negative orders use J_{-q} = (-1)^q J_q.
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <vector>

#include "eopm/errors.hpp"

namespace eopm {

struct BesselRow {
  double m = 0.0;
  int q_max = 0;
  std::vector<double> values;  // J_0(m) .. J_{q_max}(m)

  /// Any sign of q; zero outside the stored window.
  [[nodiscard]] double at(std::int64_t q) const noexcept {
    const std::int64_t a = q < 0 ? -q : q;
    if (a > q_max) return 0.0;
    const double v = values[static_cast<std::size_t>(a)];
    return (q < 0 && (a & 1)) ? -v : v;
  }
};

namespace detail {

inline void check_argument(double m) {
  if (!(m >= 0.0) || !std::isfinite(m)) {
    throw DomainError("Bessel argument must be finite and >= 0");
  }
}

inline bool series_is_safe(std::int64_t q, double m) {
  return m <= 2.0 || 0.25 * m * m <= static_cast<double>(q) + 1.0;
}

// (m/2)^q / q!, by direct product for moderate q and via lgamma beyond.
inline double series_prefactor(std::int64_t q, double m) {
  const double half = 0.5 * m;
  if (q <= 300) {
    double p = 1.0;
    for (std::int64_t k = 1; k <= q; ++k) {
      p *= half / static_cast<double>(k);
      if (p == 0.0) break;
    }
    return p;
  }
  return std::exp(static_cast<double>(q) * std::log(half) -
                  std::lgamma(static_cast<double>(q) + 1.0));
}

inline double bessel_series(std::int64_t q, double m) {
  if (m == 0.0) return q == 0 ? 1.0 : 0.0;
  const double pre = series_prefactor(q, m);
  if (pre == 0.0) return 0.0;
  const double x2 = -0.25 * m * m;
  double term = 1.0;
  double sum = 1.0;
  for (std::int64_t s = 1; s < 1000; ++s) {
    term *= x2 / (static_cast<double>(s) * static_cast<double>(q + s));
    sum += term;
    if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
  }
  return pre * sum;
}

inline std::int64_t miller_start(std::int64_t q_max, double m) {
  const auto base = std::max<std::int64_t>(q_max, static_cast<std::int64_t>(std::ceil(m)));
  std::int64_t start = base + 30 + static_cast<std::int64_t>(std::ceil(6.0 * std::cbrt(m)));
  if (start & 1) ++start;
  return start;
}

// Miller backward recurrence; returns J_0..J_{q_max}.
inline std::vector<double> bessel_miller(std::int64_t q_max, double m) {
  constexpr double kRescale = 1e100;
  const std::int64_t start = miller_start(q_max, m);
  std::vector<double> out(static_cast<std::size_t>(q_max) + 1, 0.0);

  double f_next = 0.0;   // f_{k+1}
  double f = 1e-30;      // f_k
  double sum_sq = 0.0;   // sum_{k>=1} f_k^2
  double sum_even = 0.0; // sum_{k>=1} f_{2k}
  const double two_over_m = 2.0 / m;

  for (std::int64_t k = start; k >= 1; --k) {
    if (k <= q_max) out[static_cast<std::size_t>(k)] = f;
    sum_sq += f * f;
    if ((k & 1) == 0) sum_even += f;
    const double f_prev = static_cast<double>(k) * two_over_m * f - f_next;
    f_next = f;
    f = f_prev;
    if (std::abs(f) > kRescale) {
      const double r = 1.0 / kRescale;
      f *= r;
      f_next *= r;
      sum_sq *= r * r;
      sum_even *= r;
      for (std::int64_t j = k; j <= q_max; ++j) out[static_cast<std::size_t>(j)] *= r;
    }
  }
  out[0] = f;
  const double norm = std::sqrt(f * f + 2.0 * sum_sq);
  const double sign = (f + 2.0 * sum_even) < 0.0 ? -1.0 : 1.0;
  const double scale = sign / norm;
  for (double& v : out) v *= scale;
  return out;
}

}  // namespace detail

/// J_q(m) for integer q of any sign and m >= 0.
inline double bessel_j(std::int64_t q, double m) {
  detail::check_argument(m);
  if (std::llabs(q) > 1'000'000) {
    throw DomainError("Bessel order out of range: " + std::to_string(q));
  }
  const std::int64_t a = q < 0 ? -q : q;
  const double sign = (q < 0 && (a & 1)) ? -1.0 : 1.0;
  if (detail::series_is_safe(a, m)) return sign * detail::bessel_series(a, m);
  return sign * detail::bessel_miller(a, m)[static_cast<std::size_t>(a)];
}

/// J_0(m) .. J_{q_max}(m) in one pass.
inline BesselRow bessel_row(double m, int q_max) {
  detail::check_argument(m);
  if (q_max < 0) throw DomainError("q_max must be >= 0");
  BesselRow row{m, q_max, {}};
  if (m <= 2.0) {
    row.values.resize(static_cast<std::size_t>(q_max) + 1);
    for (int q = 0; q <= q_max; ++q) row.values[static_cast<std::size_t>(q)] = detail::bessel_series(q, m);
  } else {
    row.values = detail::bessel_miller(q_max, m);
  }
  return row;
}

}  // namespace eopm

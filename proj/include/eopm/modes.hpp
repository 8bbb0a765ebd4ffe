/*
 * modes.hpp - frequency/index bookkeeping on the one-dimensional quantization
 * length.
 *
 * Right-moving travelling modes allowed by periodic boundary conditions on a
 * length L carry angular frequency
 *
 *     omega_n = 2 pi n c / L,   n = 1, 2, ...
 *
 * A modulation tone of frequency Omega = 2 pi N c / L shifts a photon by N
 * index units. For the positive-frequency scattering formulas an input index
 * n0 is written as n0 = q0 N - r0 with 0 <= r0 < N, so that the ladder reached
 * from n0 is { q N - r0 : q >= 1 }.
 */

#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <numbers>
#include <string>

#include "eopm/errors.hpp"

namespace eopm {

/// Positive index of a right-moving mode.
class ModeIndex {
public:
  explicit ModeIndex(std::int64_t n) : n_(n) {
    if (n < 1) {
      throw NonPositive("mode index must be >= 1, got " + std::to_string(n));
    }
  }

  [[nodiscard]] std::int64_t value() const noexcept { return n_; }

  friend auto operator<=>(const ModeIndex&, const ModeIndex&) = default;

private:
  std::int64_t n_;
};

class QuantizationFrame {
public:
  QuantizationFrame(double length, double speed) : length_(length), speed_(speed) {
    if (!(length > 0.0) || !(speed > 0.0)) {
      throw DomainError("quantization frame needs length > 0 and speed > 0");
    }
  }

  [[nodiscard]] double length() const noexcept { return length_; }
  [[nodiscard]] double speed() const noexcept { return speed_; }

  /// Angular frequency of mode n.
  [[nodiscard]] double frequency_of_mode(ModeIndex n) const noexcept {
    return 2.0 * std::numbers::pi * static_cast<double>(n.value()) * speed_ / length_;
  }

private:
  double length_;
  double speed_;
};

struct IndexDecomposition {
  std::int64_t q0;
  std::int64_t r0;

  friend bool operator==(const IndexDecomposition&, const IndexDecomposition&) = default;
};

/// Relative distance to the nearest grid point tolerated by mode_of_frequency.
inline constexpr double kGridTolerance = 1e-9;

inline ModeIndex mode_of_frequency(double omega, const QuantizationFrame& frame) {
  if (!std::isfinite(omega)) {
    throw NotOnGrid("frequency is not finite");
  }
  const double x = omega * frame.length() / (2.0 * std::numbers::pi * frame.speed());
  const double n = std::round(x);
  if (n < 1.0) {
    throw NonPositive("frequency maps to a non-positive mode index");
  }
  if (std::abs(x - n) > kGridTolerance * n) {
    throw NotOnGrid("frequency is not on the mode grid");
  }
  return ModeIndex(static_cast<std::int64_t>(n));
}

/// Splits n0 = q0 * step - r0 with 0 <= r0 < step.
inline IndexDecomposition decompose(ModeIndex n0, std::int64_t step) {
  if (step < 1) {
    throw DomainError("frequency step must be >= 1");
  }
  const std::int64_t q0 = (n0.value() + step - 1) / step;
  return {q0, q0 * step - n0.value()};
}

}  // namespace eopm

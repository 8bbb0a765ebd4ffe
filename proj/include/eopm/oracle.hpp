/*
 * oracle.hpp - independent reference computations for the sideband
 * amplitudes.
 *
 *   matrix exponential  exp(j G) on the one-photon sector of modes 1..M_max,
 *                       G = chi T_N + conj(chi) T_N^dagger + phi_b 1,
 *                       with T_N |n> = |n + N> and chi = e^{j theta} m / 2.
 *   adjoint expansion   e^{j phi_b} sum_p j^p/p! sum_s C(p,s) chi^s conj(chi)^{p-s},
 *                       restricted to 2s - p = q.
 *   path sum            sum_s (j chi)^{q+s} (j conj(chi))^s / ((q+s)! s!),
 *                       the amplitude of all order-(q+2s) up/down paths.
 *
 * None of these touch the Bessel module.
 */

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "eopm/classical_pm.hpp"
#include "eopm/errors.hpp"
#include "eopm/modes.hpp"

namespace eopm {

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

struct GeneratorMatrix {
  std::int64_t m_max = 0;
  ComplexMatrix entries;  // row/column a-1 holds mode a
};

struct TransitionMatrix {
  std::int64_t m_max = 0;
  ComplexMatrix entries;  // column n0-1 = output amplitudes of a photon in mode n0
};

/// Residual ||S^dagger S - 1||_max above which exponentiate gives up.
inline constexpr double kExpResidualLimit = 1e-11;
/// Edge-leakage probability above which an oracle column is rejected.
inline constexpr double kEdgeLeakageLimit = 1e-13;

namespace detail {

// Adds chi T_N + h.c. for one tone.
inline void add_tone(ComplexMatrix& g, const ModulationTone& tone) {
  const auto size = g.rows();
  const auto step = static_cast<Eigen::Index>(tone.step);
  const cplx chi = tone.chi();
  for (Eigen::Index a = 0; a + step < size; ++a) {
    g(a + step, a) += chi;
    g(a, a + step) += std::conj(chi);
  }
}

}  // namespace detail

inline GeneratorMatrix build_generator(const ModulatorSpec& spec, std::int64_t m_max) {
  if (m_max <= spec.tone.step) {
    throw DomainError("M_max must exceed the frequency step N");
  }
  GeneratorMatrix g{m_max, ComplexMatrix::Zero(m_max, m_max)};
  detail::add_tone(g.entries, spec.tone);
  g.entries.diagonal().setConstant(cplx{spec.phi_b, 0.0});
  return g;
}

/// exp(j G) by scaling and squaring around a degree-24 Taylor polynomial.
///
/// The scaled argument has norm <= 1/2, where the Taylor remainder is below
/// 2^-25 / 25! ~ 2e-33 relative.
inline TransitionMatrix exponentiate(const GeneratorMatrix& g) {
  const Eigen::Index n = g.entries.rows();
  const ComplexMatrix a = cplx{0.0, 1.0} * g.entries;
  // Max absolute row sum bounds the spectral norm.
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const ComplexMatrix scaled = a / std::ldexp(1.0, squarings);

  constexpr int kOrder = 24;
  ComplexMatrix result = ComplexMatrix::Identity(n, n);
  for (int k = kOrder; k >= 1; --k) {
    // Horner: result = I + (scaled / k) * result
    result = (scaled * result) / static_cast<double>(k);
    result.diagonal().array() += 1.0;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;

  const double residual =
      (result.adjoint() * result - ComplexMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
  if (!(residual <= kExpResidualLimit)) {
    throw ConvergenceError("matrix exponential residual " + std::to_string(residual) + " exceeds limit");
  }
  return {g.m_max, std::move(result)};
}

namespace detail {

inline std::vector<cplx> checked_column(const TransitionMatrix& s, std::int64_t n0, std::int64_t edge_width) {
  const auto col = s.entries.col(static_cast<Eigen::Index>(n0 - 1));
  std::vector<cplx> out(col.data(), col.data() + col.size());
  double leak = 0.0;
  const std::int64_t first_edge = std::max<std::int64_t>(1, s.m_max - edge_width + 1);
  for (std::int64_t a = first_edge; a <= s.m_max; ++a) leak += std::norm(out[static_cast<std::size_t>(a - 1)]);
  if (leak > kEdgeLeakageLimit) {
    throw TruncationError("oracle window edge leakage " + std::to_string(leak) + " exceeds limit");
  }
  return out;
}

}  // namespace detail

/// Smallest window accepted by oracle_column.
inline std::int64_t oracle_window(ModeIndex n0, const ModulatorSpec& spec) {
  return n0.value() + spec.tone.step * carson_window(spec.tone.m, kDefaultSafety);
}

/// Column n0 of exp(j G): entry a-1 is the amplitude in mode a.
inline std::vector<cplx> oracle_column(ModeIndex n0, const ModulatorSpec& spec, std::int64_t m_max) {
  if (m_max < oracle_window(n0, spec)) {
    throw DomainError("M_max too small for the oracle window");
  }
  const TransitionMatrix s = exponentiate(build_generator(spec, m_max));
  return detail::checked_column(s, n0.value(), spec.tone.step * carson_window(spec.tone.m, 5));
}

/// Per-order contributions of the adjoint expansion (phi_b excluded); element p is order p.
inline std::vector<cplx> adjoint_expansion_terms(std::int64_t q, const ModulatorSpec& spec, int p_max) {
  const std::int64_t aq = q < 0 ? -q : q;
  if (p_max < aq) throw DomainError("expansion order must be >= |q|");
  const cplx chi = spec.tone.chi();
  const cplx chi_c = std::conj(chi);
  std::vector<cplx> terms(static_cast<std::size_t>(p_max) + 1);
  for (int p = 0; p <= p_max; ++p) {
    if (((p - q) % 2 + 2) % 2 != 0) continue;
    const std::int64_t s = (p + q) / 2;  // 2s - p = q
    if (s < 0 || s > p) continue;
    // j^p C(p,s) / p! = j^p / (s! (p-s)!)
    cplx t = detail::j_power(p);
    for (std::int64_t i = 1; i <= s; ++i) t *= chi / static_cast<double>(i);
    for (std::int64_t i = 1; i <= p - s; ++i) t *= chi_c / static_cast<double>(i);
    terms[static_cast<std::size_t>(p)] = t;
  }
  return terms;
}

inline cplx adjoint_expansion(std::int64_t q, const ModulatorSpec& spec, int p_max) {
  cplx sum{};
  for (const cplx& t : adjoint_expansion_terms(q, spec, p_max)) sum += t;
  return std::polar(1.0, spec.phi_b) * sum;
}

namespace detail {

// Path sum for a net displacement q of any sign. For q < 0 the roles of up
// and down transitions swap.
inline cplx signed_path_sum(std::int64_t q, const ModulationTone& tone, int s_max) {
  const cplx j{0.0, 1.0};
  const cplx up = j * tone.chi();
  const cplx down = j * std::conj(tone.chi());
  const cplx lead = q >= 0 ? up : down;
  const std::int64_t k = q >= 0 ? q : -q;
  // (lead)^k / k!
  cplx term{1.0, 0.0};
  for (std::int64_t i = 1; i <= k; ++i) term *= lead / static_cast<double>(i);
  const cplx pair = up * down;
  cplx sum = term;
  for (int s = 1; s <= s_max; ++s) {
    term *= pair / (static_cast<double>(k + s) * static_cast<double>(s));
    sum += term;
  }
  return sum;
}

}  // namespace detail

inline cplx path_amplitude(std::int64_t q, const ModulatorSpec& spec, int s_max) {
  if (q < 0) throw DomainError("path_amplitude needs q >= 0");
  if (s_max < 0) throw DomainError("path order s_max must be >= 0");
  return detail::signed_path_sum(q, spec.tone, s_max);
}

/// Unrestricted path amplitude from q0 to q minus the reflected family that
/// crosses the q = 0 wall. The reflected family is the image path sum to
/// q + q0 rephased by e^{-2j q0 theta}.
/// Equals d_coefficient(q, q0, spec) e^{-j phi_b} as s_max grows.
inline cplx forbidden_path_corrected(std::int64_t q, std::int64_t q0, const ModulatorSpec& spec, int s_max) {
  if (q < 1 || q0 < 1) throw DomainError("q and q0 must be >= 1");
  if (s_max < 0) throw DomainError("path order s_max must be >= 0");
  const cplx direct = detail::signed_path_sum(q - q0, spec.tone, s_max);
  const cplx image = detail::signed_path_sum(q + q0, spec.tone, s_max) *
                     std::polar(1.0, -2.0 * static_cast<double>(q0) * spec.tone.theta);
  return direct - image;
}

/// Number of up/down sequences of length k grouped by their count of up steps.
/// Brute-force enumeration over all 2^k sequences.
inline std::vector<std::uint64_t> enumerate_path_counts(int k) {
  if (k < 0 || k > 12) throw DomainError("path enumeration is capped at order 12");
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(k) + 1, 0);
  for (std::uint32_t bits = 0; bits < (1u << k); ++bits) {
    int ups = 0;
    for (int i = 0; i < k; ++i) ups += (bits >> i) & 1u;
    ++counts[static_cast<std::size_t>(ups)];
  }
  return counts;
}

}  // namespace eopm

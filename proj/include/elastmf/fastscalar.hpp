// Copyright (c) 2026 The elastmf authors
//
// SPDX-License-Identifier: Apache-2.0
//
// Scalar kernels used by the constitutive models: a cancellation-free
// ln(1+x) series, a fixed-step Newton approximation of J^(-2/3), an
// exponent-field based fast exp, and the Bessel-ratio / erf evaluations
// needed for structure-tensor coefficients.

#ifndef ELASTMF_FASTSCALAR_HPP
#define ELASTMF_FASTSCALAR_HPP

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

#include "elastmf/errors.hpp"
#include "elastmf/numbers.hpp"

namespace emf {

enum class ExpMode { exact, fast };
// A bit-manipulation approximation of J^(-2/3) (as for exp) would be a
// third option when the value is stored anyway; only the Newton recurrence
// and the exact pow are implemented.
enum class JpowMode { newton, exact };

struct KernelConfig {
  // Calibrated so the series is within 2 ulp of log1p for |x| <= 0.5 in
  // double precision. The worst ratio |x/(2+x)| on that interval is 1/3
  // (at x = -0.5), where 16 terms leave a truncation of ~5e-18.
  int ln_series_terms = 16;
  // Newton updates applied after the seeded first iterate of the J^(-2/3)
  // recurrence; 3 gives ~1e-12 relative accuracy for |J-1| <= 0.05.
  int jpow_newton_steps = 3;
  ExpMode exp_mode = ExpMode::exact;
  JpowMode jpow_mode = JpowMode::newton;
};

/// ln(1+x) via the odd-power series 2 sum_{n} (1/(2n+1)) (x/(2+x))^(2n+1).
/// All terms share the sign of x, and they are accumulated smallest to
/// largest. Falls back to the platform log1p for |x| > 0.5.
template <typename N>
inline N ln_plus_one(const N& x, const KernelConfig& cfg = {}) {
  if (min_lane(x) <= scalar_of<N>(-1))
    throw DomainError("ln_plus_one: argument <= -1");
  const int terms = cfg.ln_series_terms;
  if constexpr (!number_traits<N>::batched) {
    if (std::abs(x) > scalar_of<N>(0.5)) return std::log1p(x);
  }
  const N y = x / (N(2) + x);
  const N y2 = y * y;
  // odd powers y^(2n+1), n = 0..terms-1
  N pow = y;
  N powers[64];
  for (int n = 0; n < terms; ++n) {
    powers[n] = pow;
    pow = pow * y2;
  }
  N sum(0);
  for (int n = terms - 1; n >= 0; --n)
    sum += powers[n] * (N(1) / N(scalar_of<N>(2 * n + 1)));
  N series = N(2) * sum;
  if constexpr (number_traits<N>::batched) {
    return select(abs_number(x) > N(scalar_of<N>(0.5)), log1p_number(x),
                  series);
  } else {
    return series;
  }
}

/// Newton recurrence for J^(-2/3) with f(x) = x^-3 - J^2, seeded at x0 = 1:
/// alpha = (1/3)[(J-1+2)(J-1) + 1], beta = 4/3 - alpha, then `steps` updates
/// beta <- (4/3) beta - alpha beta^4 with beta^4 by repeated squaring.
/// Accurate only near J = 1; far from it the iteration diverges (tolerated).
template <typename N>
inline N fast_jpow(const N& j_minus_1, int steps) {
  const N third = N(1) / N(3);
  const N four_thirds = N(4) / N(3);
  const N alpha = ((j_minus_1 + N(2)) * j_minus_1 + N(1)) * third;
  N beta = four_thirds - alpha;
  for (int n = 0; n < steps; ++n) {
    const N b2 = beta * beta;
    const N gamma = b2 * b2;
    beta = four_thirds * beta - alpha * gamma;
  }
  return beta;
}

/// Exact J^(-2/3) through the platform pow, from J-1.
template <typename N>
inline N jpow_exact(const N& j_minus_1) {
  return pow_number(N(1) + j_minus_1,
                    scalar_of<N>(-2.0) / scalar_of<N>(3.0));
}

template <typename N>
inline N jpow(const N& j_minus_1, const KernelConfig& cfg) {
  return cfg.jpow_mode == JpowMode::newton
             ? fast_jpow(j_minus_1, cfg.jpow_newton_steps)
             : jpow_exact(j_minus_1);
}

namespace detail {

// Degree-5 polynomial for e^f on [-ln2/2, ln2/2] with p(0) = 1 pinned;
// own minimax fit, max relative error 9.15e-8 over the binade.
inline constexpr double exp_poly_c1 = 0.9999997071892389;
inline constexpr double exp_poly_c2 = 0.49999149530710524;
inline constexpr double exp_poly_c3 = 0.16667636195457053;
inline constexpr double exp_poly_c4 = 0.041897929298110925;
inline constexpr double exp_poly_c5 = 0.008290314679698952;

inline double fast_exp_scalar(double x) {
  if (x != x) return x;
  if (x > 709.782712893384) return std::numeric_limits<double>::infinity();
  if (x < -745.2) return 0.0;
  const double inv_ln2 = 1.4426950408889634074;
  const double ln2_hi = 6.93147180369123816490e-01;
  const double ln2_lo = 1.90821492927058770002e-10;
  const double nd = std::round(x * inv_ln2);
  const long long n = static_cast<long long>(nd);
  const double f = (x - nd * ln2_hi) - nd * ln2_lo;
  double p = exp_poly_c5;
  p = p * f + exp_poly_c4;
  p = p * f + exp_poly_c3;
  p = p * f + exp_poly_c2;
  p = p * f + exp_poly_c1;
  p = p * f + 1.0;
  if (n >= -1022 && n <= 1023) {
    const double scale =
        std::bit_cast<double>(static_cast<std::uint64_t>(n + 1023) << 52);
    return p * scale;
  }
  return std::ldexp(p, static_cast<int>(n));  // subnormal tail
}

inline float fast_exp_scalar(float x) {
  if (x != x) return x;
  if (x > 88.72f) return std::numeric_limits<float>::infinity();
  if (x < -103.98f) return 0.0f;
  const float inv_ln2 = 1.44269504088896341f;
  const float ln2_hi = 0.693359375f;
  const float ln2_lo = -2.12194440e-4f;
  const float nd = std::round(x * inv_ln2);
  const int n = static_cast<int>(nd);
  const float f = (x - nd * ln2_hi) - nd * ln2_lo;
  float p = static_cast<float>(exp_poly_c5);
  p = p * f + static_cast<float>(exp_poly_c4);
  p = p * f + static_cast<float>(exp_poly_c3);
  p = p * f + static_cast<float>(exp_poly_c2);
  p = p * f + static_cast<float>(exp_poly_c1);
  p = p * f + 1.0f;
  if (n >= -126 && n <= 127) {
    const float scale =
        std::bit_cast<float>(static_cast<std::uint32_t>(n + 127) << 23);
    return p * scale;
  }
  return std::ldexp(p, n);
}

}  // namespace detail

/// exp(x); mode=fast decomposes x/ln2 into integer and fractional parts,
/// injects the integer into the exponent bits and corrects the fraction
/// with the fixed degree-5 polynomial. Max relative error 9.2e-8 on
/// [-20, 20] in double. Overflow saturates to +inf in both modes.
template <typename N>
inline N fast_exp(const N& x, const KernelConfig& cfg = {}) {
  if (cfg.exp_mode == ExpMode::exact) return exp_number(x);
  if constexpr (number_traits<N>::batched) {
    N r;
    for (int i = 0; i < number_traits<N>::width; ++i)
      set_lane(r, i, detail::fast_exp_scalar(get_lane(x, i)));
    return r;
  } else {
    return detail::fast_exp_scalar(x);
  }
}

/// I1(a)/I0(a), power series for a <= 15 and the ratio of the optimally
/// truncated large-argument expansions beyond; the seam is continuous to
/// ~4e-13. Double precision only.
double bessel_ratio(double a);

/// erf(x) for x >= 0, Maclaurin series below x = 4 and the complementary
/// asymptotic expansion above; absolute error under 1e-13.
double erf_approx(double x);

}  // namespace emf

#endif

// Copyright (c) 2026 The elastmf authors
//
// SPDX-License-Identifier: Apache-2.0

#include "elastmf/fastscalar.hpp"

#include <cmath>

namespace emf {

namespace {

constexpr double kSeriesEps = 1e-17;

// Power series of the modified Bessel functions of the first kind; all
// terms are positive so plain ascending accumulation is stable.
double bessel_i0_series(double a) {
  const double t = 0.25 * a * a;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= t / (static_cast<double>(k) * k);
    sum += term;
    if (term < kSeriesEps * sum) break;
  }
  return sum;
}

double bessel_i1_series(double a) {
  const double t = 0.25 * a * a;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= t / (static_cast<double>(k) * (k + 1));
    sum += term;
    if (term < kSeriesEps * sum) break;
  }
  return 0.5 * a * sum;
}

// Optimally truncated large-argument expansion
//   I_nu(a) ~ e^a/sqrt(2 pi a) * sum_k (-1)^k t_k,
//   t_{k+1} = t_k (mu - (2k+1)^2) / (8 a (k+1)), mu = 4 nu^2.
// The exponential prefactor cancels in the ratio.
double bessel_asymptotic_sum(double a, int nu) {
  const double mu = 4.0 * nu * nu;
  double term = 1.0, sum = 1.0, prev_mag = 1.0;
  for (int k = 0; k < 400; ++k) {
    const double c = 2.0 * k + 1.0;
    const double next = -term * (mu - c * c) / (8.0 * a * (k + 1));
    if (std::abs(next) >= prev_mag) break;  // series started diverging
    sum += next;
    prev_mag = std::abs(next);
    term = next;
    if (prev_mag < kSeriesEps * std::abs(sum)) break;
  }
  return sum;
}

}  // namespace

double bessel_ratio(double a) {
  if (a < 0.0) throw DomainError("bessel_ratio: negative argument");
  if (a == 0.0) return 0.0;
  if (a <= 15.0) return bessel_i1_series(a) / bessel_i0_series(a);
  return bessel_asymptotic_sum(a, 1) / bessel_asymptotic_sum(a, 0);
}

double erf_approx(double x) {
  if (x < 0.0) throw DomainError("erf_approx: negative argument");
  const double two_over_sqrt_pi = 1.1283791670955125739;
  if (x <= 4.0) {
    // erf(x) = 2/sqrt(pi) sum_n (-1)^n x^(2n+1) / (n! (2n+1))
    const double x2 = x * x;
    double t = x, sum = x;
    for (int n = 1; n < 120; ++n) {
      t *= -x2 / n;
      const double contrib = t / (2.0 * n + 1.0);
      sum += contrib;
      if (std::abs(contrib) < kSeriesEps * std::abs(sum) + 1e-300) break;
    }
    return two_over_sqrt_pi * sum;
  }
  // erfc(x) = e^(-x^2)/(x sqrt(pi)) [1 - 1/(2x^2) + 3/(2x^2)^2 ...]
  const double ix2 = 1.0 / (2.0 * x * x);
  double term = 1.0, sum = 1.0, prev_mag = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double next = -term * (2.0 * k - 1.0) * ix2;
    if (std::abs(next) >= prev_mag) break;
    sum += next;
    prev_mag = std::abs(next);
    term = next;
    if (prev_mag < kSeriesEps * std::abs(sum)) break;
  }
  const double erfc =
      std::exp(-x * x) / (x * 1.7724538509055160273) * sum;
  return 1.0 - erfc;
}

}  // namespace emf

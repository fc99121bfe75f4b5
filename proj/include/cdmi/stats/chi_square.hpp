#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "cdmi/errors.hpp"

namespace cdmi::stats {

namespace detail {

constexpr int kMaxTerms = 1000;
constexpr double kEps = 1e-17;

// Series for P(a, x), good for x < a + 1.
inline double lower_gamma_series(double a, double x) {
  double ap = a, del = 1.0 / a, sum = del;
  for (int n = 0; n < kMaxTerms; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Modified Lentz continued fraction for Q(a, x), good for x >= a + 1.
inline double upper_gamma_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxTerms; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

inline void check_dof(int k) {
  if (k < 1) throw DomainError("chi-square degrees of freedom must be positive, got " + std::to_string(k));
}

}  // namespace detail

/// Regularized lower incomplete gamma P(a, x).
inline double regularized_gamma_p(double a, double x) {
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return detail::lower_gamma_series(a, x);
  return 1.0 - detail::upper_gamma_fraction(a, x);
}

inline double chi2_cdf(double x, int k) {
  detail::check_dof(k);
  if (!(x >= 0.0)) throw DomainError("chi2_cdf: x must be >= 0, got " + std::to_string(x));
  return regularized_gamma_p(0.5 * k, 0.5 * x);
}

inline double chi2_pdf(double x, int k) {
  detail::check_dof(k);
  if (x <= 0.0) return k == 2 ? 0.5 : 0.0;
  const double a = 0.5 * k;
  return std::exp((a - 1.0) * std::log(x) - 0.5 * x - a * std::log(2.0) - std::lgamma(a));
}

/// Inverse of chi2_cdf. alpha = 1 returns +infinity, which the rpo and cdmi
/// layers treat as the "whole space" region.
inline double chi2_quantile(double alpha, int k) {
  detail::check_dof(k);
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("chi2_quantile: alpha must lie in [0, 1]");
  if (alpha == 0.0) return 0.0;
  if (alpha == 1.0) return std::numeric_limits<double>::infinity();

  double lo = 0.0, hi = std::max(1.0, static_cast<double>(k));
  while (chi2_cdf(hi, k) < alpha) {
    lo = hi;
    hi *= 2.0;
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double f = chi2_cdf(x, k) - alpha;
    if (f == 0.0) return x;
    if (f < 0.0)
      lo = x;
    else
      hi = x;
    const double pdf = chi2_pdf(x, k);
    double next = pdf > 0.0 ? x - f / pdf : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-15 * x || hi - lo <= 1e-15 * hi) return next;
    x = next;
  }
  return x;
}

/// True for the alpha_x = 1 marker returned by chi2_quantile.
inline bool is_unbounded(double m) { return std::isinf(m) && m > 0.0; }

}  // namespace cdmi::stats

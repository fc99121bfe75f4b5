#pragma once

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "cdmi/errors.hpp"
#include "cdmi/polyalg/truncated_poly.hpp"

namespace cdmi::polyalg {

namespace series {

// Univariate truncated power series helpers: coefficient k multiplies t^k.

/// u^alpha for a series u with u[0] > 0 (J.C.P. Miller recurrence).
inline std::vector<double> pow(const std::vector<double>& u, double alpha, std::size_t n) {
  std::vector<double> g(n + 1, 0.0);
  g[0] = std::pow(u[0], alpha);
  for (std::size_t k = 1; k <= n; ++k) {
    double s = 0.0;
    for (std::size_t j = 1; j <= k && j < u.size(); ++j)
      s += ((alpha + 1.0) * static_cast<double>(j) - static_cast<double>(k)) * u[j] * g[k - j];
    g[k] = s / (static_cast<double>(k) * u[0]);
  }
  return g;
}

/// Antiderivative with the given constant term.
inline std::vector<double> integrate(const std::vector<double>& d, double c0, std::size_t n) {
  std::vector<double> f(n + 1, 0.0);
  f[0] = c0;
  for (std::size_t k = 1; k <= n; ++k) f[k] = d[k - 1] / static_cast<double>(k);
  return f;
}

}  // namespace series

namespace detail {

[[noreturn]] inline void domain_fail(const char* fn, double c) {
  std::ostringstream os;
  os.precision(17);
  os << fn << ": constant term " << c << " outside the function domain";
  throw DomainError(os.str());
}

/// f(p) = sum_k taylor[k] * (p - c)^k, evaluated by Horner on the nilpotent part.
inline TruncatedPoly compose(const TruncatedPoly& p, const std::vector<double>& taylor) {
  const int n = p.order();
  TruncatedPoly nil = p - p.constant_part();
  TruncatedPoly r = TruncatedPoly::constant(n, taylor[static_cast<std::size_t>(n)]);
  for (int k = n - 1; k >= 0; --k) {
    r = r * nil;
    r += taylor[static_cast<std::size_t>(k)];
  }
  return r;
}

}  // namespace detail

inline TruncatedPoly recip(const TruncatedPoly& p) {
  const double c = p.constant_part();
  if (c == 0.0 || !std::isfinite(c)) detail::domain_fail("recip", c);
  const auto n = static_cast<std::size_t>(p.order());
  std::vector<double> t(n + 1);
  t[0] = 1.0 / c;
  for (std::size_t k = 1; k <= n; ++k) t[k] = -t[k - 1] / c;
  return detail::compose(p, t);
}

/// p^alpha for real alpha; requires a positive constant term.
inline TruncatedPoly pow(const TruncatedPoly& p, double alpha) {
  const double c = p.constant_part();
  if (!(c > 0.0) || !std::isfinite(c)) detail::domain_fail("pow", c);
  const auto n = static_cast<std::size_t>(p.order());
  return detail::compose(p, series::pow({c, 1.0}, alpha, n));
}

inline TruncatedPoly sqrt(const TruncatedPoly& p) {
  const double c = p.constant_part();
  if (!(c > 0.0) || !std::isfinite(c)) detail::domain_fail("sqrt", c);
  return pow(p, 0.5);
}

inline TruncatedPoly asin(const TruncatedPoly& p) {
  const double c = p.constant_part();
  if (!(std::abs(c) < 1.0)) detail::domain_fail("asin", c);
  const auto n = static_cast<std::size_t>(p.order());
  // d/dt asin(c + t) = (1 - c^2 - 2ct - t^2)^(-1/2)
  const auto d = series::pow({1.0 - c * c, -2.0 * c, -1.0}, -0.5, n);
  return detail::compose(p, series::integrate(d, std::asin(c), n));
}

inline TruncatedPoly atan(const TruncatedPoly& p) {
  const double c = p.constant_part();
  if (!std::isfinite(c)) detail::domain_fail("atan", c);
  const auto n = static_cast<std::size_t>(p.order());
  // d/dt atan(c + t) = (1 + c^2 + 2ct + t^2)^(-1)
  const auto d = series::pow({1.0 + c * c, 2.0 * c, 1.0}, -1.0, n);
  return detail::compose(p, series::integrate(d, std::atan(c), n));
}

/// Two-argument arctangent. The branch is fixed by the constant parts only:
/// atan(y/x) plus a quadrant shift when |x0| >= |y0|, otherwise the
/// complementary form +-pi/2 - atan(x/y) to keep the ratio bounded.
inline TruncatedPoly atan2(const TruncatedPoly& y, const TruncatedPoly& x) {
  const double y0 = y.constant_part();
  const double x0 = x.constant_part();
  if (x0 == 0.0 && y0 == 0.0) detail::domain_fail("atan2", 0.0);
  constexpr double pi = std::numbers::pi;
  if (std::abs(x0) >= std::abs(y0)) {
    TruncatedPoly r = atan(y * recip(x));
    if (x0 < 0.0) r += (y0 >= 0.0 ? pi : -pi);
    return r;
  }
  TruncatedPoly r = -atan(x * recip(y));
  r += (y0 > 0.0 ? pi / 2.0 : -pi / 2.0);
  return r;
}

}  // namespace cdmi::polyalg

#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <string>

#include "cdmi/errors.hpp"
#include "cdmi/polyalg/intrinsics.hpp"

namespace cdmi::dynamics {

/// Position (LU) and velocity (VU) in the Earth-Moon rotating frame.
using StateVec = Eigen::Matrix<double, 6, 1>;

template <class Scalar>
using State = std::array<Scalar, 6>;

struct CrtbpParams {
  double mu = 0.0121505839;
  double length_unit_km = 384400.0;
  double velocity_unit_km_s = 1.02454629434750;
  double time_unit_s = 375190.464423878;

  void validate() const {
    if (!(mu > 0.0 && mu < 0.5)) throw ConfigError("mass ratio mu must lie in (0, 0.5)");
    if (!(length_unit_km > 0.0 && velocity_unit_km_s > 0.0 && time_unit_s > 0.0))
      throw ConfigError("unit conversion constants must be positive");
  }
};

namespace detail {

inline double inverse_cube_of_sqrt(double r2) {
  const double r = std::sqrt(r2);
  return 1.0 / (r2 * r);
}

inline polyalg::TruncatedPoly inverse_cube_of_sqrt(const polyalg::TruncatedPoly& r2) {
  return polyalg::pow(r2, -1.5);
}

}  // namespace detail

/// CRTBP equations of motion; the same code serves doubles and polynomials.
template <class Scalar>
State<Scalar> crtbp_rhs(double /*t*/, const State<Scalar>& s, const CrtbpParams& p) {
  const double mu = p.mu;
  const Scalar& x = s[0];
  const Scalar& y = s[1];
  const Scalar& z = s[2];
  const Scalar xe = x + mu;
  const Scalar xm = x + (mu - 1.0);
  const Scalar yz2 = y * y + z * z;
  const Scalar r1sq = xe * xe + yz2;
  const Scalar r2sq = xm * xm + yz2;
  const double r1c = polyalg::constant_part(r1sq);
  const double r2c = polyalg::constant_part(r2sq);
  if (!(r1c > 0.0) || !(r2c > 0.0) || !std::isfinite(r1c) || !std::isfinite(r2c)) {
    throw IntegrationError("CRTBP singularity: distance to a primary is zero or non-finite");
  }
  const Scalar k1 = (1.0 - mu) * detail::inverse_cube_of_sqrt(r1sq);
  const Scalar k2 = mu * detail::inverse_cube_of_sqrt(r2sq);
  const Scalar ksum = k1 + k2;
  return {
      s[3],
      s[4],
      s[5],
      2.0 * s[4] + x - k1 * xe - k2 * xm,
      -2.0 * s[3] + y - ksum * y,
      -(ksum * z),
  };
}

inline StateVec crtbp_rhs(double t, const StateVec& s, const CrtbpParams& p) {
  State<double> a{s[0], s[1], s[2], s[3], s[4], s[5]};
  const auto d = crtbp_rhs<double>(t, a, p);
  return StateVec(d.data());
}

/// Jacobi constant C = x^2 + y^2 + 2(1-mu)/r1 + 2mu/r2 - v^2.
inline double jacobi_constant(const StateVec& s, const CrtbpParams& p) {
  const double r1 = std::sqrt((s[0] + p.mu) * (s[0] + p.mu) + s[1] * s[1] + s[2] * s[2]);
  const double r2 = std::sqrt((s[0] + p.mu - 1.0) * (s[0] + p.mu - 1.0) + s[1] * s[1] + s[2] * s[2]);
  const double v2 = s[3] * s[3] + s[4] * s[4] + s[5] * s[5];
  return s[0] * s[0] + s[1] * s[1] + 2.0 * (1.0 - p.mu) / r1 + 2.0 * p.mu / r2 - v2;
}

}  // namespace cdmi::dynamics

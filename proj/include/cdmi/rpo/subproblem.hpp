#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "cdmi/errors.hpp"
#include "cdmi/stats/chi_square.hpp"

namespace cdmi::rpo {

/// One convex step: minimize |W (A dx + b)|^2 subject to
/// q |U (dx_prev + dx)|^2 <= m_x, where W' W = R^-1 and U' U = P0^-1.
/// q = 0.5 is the half-statistic convention (ball radius^2 = 2 m_x).
struct SubproblemInput {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::MatrixXd W;
  Eigen::Matrix<double, 6, 6> U;
  double m_x = 0.0;
  Eigen::Matrix<double, 6, 1> dx_prev = Eigen::Matrix<double, 6, 1>::Zero();
  double stat_scale = 0.5;
};

struct SubproblemSolution {
  Eigen::Matrix<double, 6, 1> dx;
  double lambda = 0.0;
  double objective = 0.0;  // |W (A dx + b)|^2
  int secular_iterations = 0;
};

inline SubproblemSolution solve_subproblem(const SubproblemInput& in) {
  using Vec6 = Eigen::Matrix<double, 6, 1>;
  if (in.A.cols() != 6 || in.A.rows() != in.b.size() || in.W.rows() != in.b.size() || in.W.cols() != in.b.size())
    throw ContractViolation("subproblem: dimension mismatch");
  if (!in.A.allFinite() || !in.b.allFinite() || !in.W.allFinite() || !in.U.allFinite() || !in.dx_prev.allFinite())
    throw ContractViolation("subproblem: non-finite input");
  if (!(in.m_x > 0.0)) throw ContractViolation("subproblem: m_x must be positive (m_x = 0 is handled upstream)");
  if (!(in.stat_scale > 0.0)) throw ContractViolation("subproblem: statistic scale must be positive");

  // u = U (dx_prev + dx): min |B u - d|^2 s.t. |u|^2 <= r2
  const Eigen::Matrix<double, 6, 6> Uinv = in.U.inverse();
  const Eigen::MatrixXd B = in.W * in.A * Uinv;
  const Eigen::VectorXd d = in.W * (in.A * in.dx_prev - in.b);
  const bool unbounded = stats::is_unbounded(in.m_x);
  const double r2 = in.m_x / in.stat_scale;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(B, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& s = svd.singularValues();
  const Eigen::VectorXd c = svd.matrixU().transpose() * d;
  const double smax = s.size() > 0 ? s[0] : 0.0;
  const double cutoff = smax * 6.0 * std::numeric_limits<double>::epsilon();
  const Eigen::Index k = s.size();

  const auto u_of = [&](double lam) {
    Vec6 coeffs = Vec6::Zero();
    for (Eigen::Index i = 0; i < k; ++i) {
      if (s[i] <= cutoff) continue;
      coeffs[i] = s[i] * c[i] / (s[i] * s[i] + lam);
    }
    return coeffs;  // coordinates in the right singular basis
  };

  SubproblemSolution out;
  Vec6 uc = u_of(0.0);
  if (!unbounded && uc.squaredNorm() > r2) {
    // secular equation 1/|u(lam)| = 1/r, safeguarded Newton on [lo, hi]
    const double r = std::sqrt(r2);
    double lo = 0.0;
    double hi = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) hi += (s[i] * c[i]) * (s[i] * c[i]);
    hi = std::sqrt(hi) / r;
    double lam = 0.5 * (lo + hi);
    bool done = false;
    for (int it = 1; it <= 200; ++it) {
      out.secular_iterations = it;
      const Vec6 u = u_of(lam);
      const double nu = u.norm();
      if (nu > r)
        lo = lam;
      else
        hi = lam;
      // d|u|/dlam = -(sum s^2 c^2 / (s^2 + lam)^3) / |u|
      double dnorm = 0.0;
      for (Eigen::Index i = 0; i < k; ++i) {
        if (s[i] <= cutoff) continue;
        const double den = s[i] * s[i] + lam;
        dnorm -= u[i] * u[i] / den;
      }
      dnorm /= nu;
      const double phi = 1.0 / nu - 1.0 / r;
      const double dphi = -dnorm / (nu * nu);
      double next = dphi > 0.0 ? lam - phi / dphi : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      const double change = std::abs(next - lam);
      lam = next;
      if (change <= 1e-12 * lam || hi - lo <= 1e-12 * hi) {
        done = true;
        break;
      }
    }
    if (!done) throw ConvergenceError("subproblem: secular equation did not converge in 200 iterations");
    uc = u_of(lam);
    // land exactly on the sphere to absorb the last rounding
    uc *= std::sqrt(r2) / uc.norm();
    out.lambda = lam;
  }
  const Vec6 u = svd.matrixV() * uc;
  out.dx = Uinv * u - in.dx_prev;
  out.objective = (in.W * (in.A * out.dx + in.b)).squaredNorm();
  return out;
}

}  // namespace cdmi::rpo

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cdmi/observation/angles.hpp"
#include "cdmi/rpo/subproblem.hpp"
#include "cdmi/stats/gaussian.hpp"

namespace cdmi::rpo {

using Vec6 = Eigen::Matrix<double, 6, 1>;

struct RpoOptions {
  double eta = 1e-6;        // stop when |step| <= eta (nd, Euclidean)
  int max_iterations = 50;
  double stat_scale = 0.5;  // 0.5: half statistic; 1: full quadratic form
  bool trace = false;
};

struct RpoIteration {
  int iteration = 0;
  double step_norm = 0.0;
  double objective = 0.0;  // |W (g(dx) - z)|^2 after the step, polynomial
  double lambda = 0.0;
};

struct RpoResult {
  Vec6 dx_star = Vec6::Zero();
  Eigen::VectorXd dz_star;        // full-propagation residual at dx_star
  Eigen::VectorXd poly_residual;  // g(dx_star) - z
  double m_z = 0.0;
  int iterations = 0;
  bool converged = false;
  double multiplier = 0.0;
  std::vector<RpoIteration> trace;
};

/// Everything the optimizer needs about one detection case.
struct CaseInputs {
  const observation::MeasurementExpansion* meas = nullptr;
  const observation::ObservationSet* obs = nullptr;
  const stats::GaussianState* prior = nullptr;
  dynamics::CrtbpParams params;
  dynamics::IntegratorOptions integrator;
};

namespace detail {

inline void check_case(const CaseInputs& c) {
  if (!c.meas || !c.obs || !c.prior) throw ContractViolation("rpo: incomplete case inputs");
  if (c.meas->dim() != c.obs->dim()) throw ContractViolation("rpo: measurement map and observations differ in size");
  if (c.meas->epochs != c.obs->epochs()) throw ContractViolation("rpo: measurement map and observation epochs differ");
  if (c.prior->mean() != c.meas->ref_state)
    throw ContractViolation("rpo: prior mean must be the expansion point of the measurement map");
}

inline double weighted_norm2(const Eigen::MatrixXd& w, const Eigen::VectorXd& r) { return (w * r).squaredNorm(); }

}  // namespace detail

/// Full-propagation residual h(F(x0_hat + dx)) - z.
inline Eigen::VectorXd nonlinear_residual(const CaseInputs& c, const Vec6& dx) {
  const Eigen::VectorXd pred = observation::predict_angles(c.meas->ref_state + dx, c.meas->t0, c.meas->epochs,
                                                           c.meas->observer_states, c.params, c.integrator);
  return observation::angle_residual(pred, c.obs->stacked_values());
}

/// Sequential convex solve for the closest measurement inside the
/// confidence region. Iteration 1 linearizes at 0 with the degree-1 block;
/// later iterations use the full-order Jacobian at the previous iterate.
inline RpoResult rpo_solve(const CaseInputs& c, const stats::ConfidenceBudget& budget, const RpoOptions& opt = {}) {
  detail::check_case(c);
  if (!(budget.alpha_x > 0.0 && budget.alpha_x < 1.0)) throw ContractViolation("rpo_solve: alpha_x must lie in (0, 1)");
  if (!(opt.eta > 0.0)) throw ContractViolation("rpo_solve: eta must be positive");

  const Eigen::VectorXd z = c.obs->stacked_values();
  const Eigen::MatrixXd W = c.obs->whitening();
  SubproblemInput in;
  in.W = W;
  in.U = c.prior->chol_inv();
  in.m_x = budget.m_x;
  in.stat_scale = opt.stat_scale;

  RpoResult res;
  Vec6 dx = Vec6::Zero();
  for (int j = 1; j <= opt.max_iterations; ++j) {
    if (j == 1) {
      in.A = c.meas->map.linear_part();
      in.b = observation::angle_residual(c.meas->map.constant_part(), z);
    } else {
      in.A = c.meas->map.jacobian_at(std::span<const double>(dx.data(), 6));
      in.b = observation::angle_residual(c.meas->map.eval(dx), z);
    }
    in.dx_prev = dx;
    const SubproblemSolution step = solve_subproblem(in);
    dx += step.dx;
    res.iterations = j;
    res.multiplier = step.lambda;
    const double step_norm = step.dx.norm();
    if (opt.trace) {
      const double obj = detail::weighted_norm2(W, c.meas->map.eval(dx) - z);
      res.trace.push_back({j, step_norm, obj, step.lambda});
    }
    if (step_norm <= opt.eta) {
      res.converged = true;
      break;
    }
  }
  res.dx_star = dx;
  res.poly_residual = c.meas->map.eval(dx) - z;
  res.dz_star = nonlinear_residual(c, dx);
  res.m_z = opt.stat_scale * detail::weighted_norm2(W, res.dz_star);
  return res;
}

/// Closed-form endpoints: alpha_x = 0 keeps only the mean (residual of the
/// prediction), alpha_x = 1 admits every measurement (zero residual).
inline RpoResult closest_point_special(double alpha_x, const CaseInputs& c, double stat_scale = 0.5) {
  detail::check_case(c);
  RpoResult res;
  res.converged = true;
  const Eigen::VectorXd z = c.obs->stacked_values();
  if (alpha_x == 1.0) {
    res.dz_star = Eigen::VectorXd::Zero(z.size());
    res.poly_residual = res.dz_star;
    res.m_z = 0.0;
    return res;
  }
  if (alpha_x != 0.0) throw ContractViolation("closest_point_special: alpha_x must be exactly 0 or 1");
  res.dz_star = observation::angle_residual(c.meas->map.constant_part(), z);
  res.poly_residual = res.dz_star;
  res.m_z = stat_scale * detail::weighted_norm2(c.obs->whitening(), res.dz_star);
  return res;
}

}  // namespace cdmi::rpo

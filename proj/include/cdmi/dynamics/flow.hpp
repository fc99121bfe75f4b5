#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cdmi/dynamics/crtbp.hpp"
#include "cdmi/dynamics/runge_kutta.hpp"
#include "cdmi/polyalg/poly_map.hpp"

namespace cdmi::dynamics {

/// Taylor expansion of the CRTBP flow about a reference state.
struct FlowExpansion {
  polyalg::PolyMap map;  // 6 components in the deviation variables
  StateVec ref_state;
  double t0 = 0.0;
  double t1 = 0.0;

  StateVec nominal() const { return map.constant_part(); }
  StateVec eval(const StateVec& delta) const { return map.eval(delta); }
  Eigen::Matrix<double, 6, 6> stm() const { return map.linear_part(); }
};

inline StateVec propagate(const StateVec& s0, double t0, double t1, const CrtbpParams& params,
                          const IntegratorOptions& opt = {}, IntegrationStats* stats = nullptr) {
  State<double> y{s0[0], s0[1], s0[2], s0[3], s0[4], s0[5]};
  const auto rhs = [&params](double t, const State<double>& s) { return crtbp_rhs<double>(t, s, params); };
  y = integrate(rhs, y, t0, t1, opt, stats);
  return StateVec(y.data());
}

/// Order-n expansions of the flow from t0 to each epoch in `epochs`
/// (sorted ascending), integrated in one pass with the state initialised as
/// ref + identity polynomial.
inline std::vector<FlowExpansion> flow_expansions(const StateVec& ref, double t0, const std::vector<double>& epochs,
                                                  int order, const CrtbpParams& params,
                                                  const IntegratorOptions& opt = {}) {
  if (order < 1) throw ContractViolation("flow expansion order must be >= 1");
  for (std::size_t i = 1; i < epochs.size(); ++i) {
    if (!(epochs[i] > epochs[i - 1])) throw ContractViolation("flow expansion epochs must be strictly increasing");
  }
  using polyalg::TruncatedPoly;
  State<TruncatedPoly> y;
  for (int v = 0; v < 6; ++v) y[static_cast<std::size_t>(v)] = TruncatedPoly::variable(order, v, ref[v]);
  const auto rhs = [&params](double t, const State<TruncatedPoly>& s) { return crtbp_rhs<TruncatedPoly>(t, s, params); };

  std::vector<FlowExpansion> out;
  double t = t0;
  for (double te : epochs) {
    y = integrate(rhs, y, t, te, opt);
    t = te;
    out.push_back({polyalg::PolyMap(std::vector<TruncatedPoly>(y.begin(), y.end())), ref, t0, te});
  }
  return out;
}

inline FlowExpansion flow_expansion(const StateVec& ref, double t0, double t1, int order, const CrtbpParams& params,
                                    const IntegratorOptions& opt = {}) {
  return flow_expansions(ref, t0, {t1}, order, params, opt).front();
}

/// Dominant right singular vector of a 3x3 sensitivity block. Sign fixed so
/// the largest-magnitude component is positive; ties resolve to the first axis.
inline Eigen::Vector3d dominant_input_direction(const Eigen::Matrix3d& block) {
  if (block.norm() == 0.0) throw DomainError("degenerate geometry: position/velocity STM block is zero");
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(block, Eigen::ComputeFullV);
  Eigen::Vector3d u = svd.matrixV().col(0);
  Eigen::Index imax = 0;
  u.cwiseAbs().maxCoeff(&imax);
  if (u[imax] < 0.0) u = -u;
  return u;
}

/// Most measurement-sensitive maneuver direction: the initial velocity
/// direction with the largest position response (dominant eigenvector of the
/// Cauchy-Green tensor of the position/velocity STM block).
inline Eigen::Vector3d stm_and_cgt_direction(const FlowExpansion& flow) {
  const Eigen::Matrix<double, 6, 6> phi = flow.stm();
  return dominant_input_direction(phi.block<3, 3>(0, 3));
}

}  // namespace cdmi::dynamics

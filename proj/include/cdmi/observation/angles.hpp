#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <vector>

#include "cdmi/dynamics/flow.hpp"
#include "cdmi/errors.hpp"
#include "cdmi/polyalg/intrinsics.hpp"

namespace cdmi::observation {

using dynamics::StateVec;

struct AngleObs {
  double epoch = 0.0;
  double alpha = 0.0;  // right ascension, rad
  double beta = 0.0;   // declination, rad
  Eigen::Matrix2d noise_cov = Eigen::Matrix2d::Identity();
};

/// Time-ordered angle measurements; stacked vectors are [a1, b1, a2, b2, ...].
class ObservationSet {
 public:
  ObservationSet() = default;
  explicit ObservationSet(std::vector<AngleObs> obs) : obs_(std::move(obs)) {
    if (obs_.empty()) throw ContractViolation("observation set is empty");
    for (std::size_t i = 0; i < obs_.size(); ++i) {
      const AngleObs& o = obs_[i];
      if (i > 0 && !(o.epoch > obs_[i - 1].epoch)) throw ContractViolation("observation epochs must be strictly increasing");
      if (!(o.alpha > -std::numbers::pi && o.alpha <= std::numbers::pi) ||
          !(std::abs(o.beta) <= std::numbers::pi / 2.0))
        throw ContractViolation("observation angle out of range");
      Eigen::LLT<Eigen::Matrix2d> llt(o.noise_cov);
      if (llt.info() != Eigen::Success || o.noise_cov(0, 1) != o.noise_cov(1, 0))
        throw ContractViolation("noise covariance must be symmetric positive definite");
    }
  }

  std::size_t size() const { return obs_.size(); }
  Eigen::Index dim() const { return static_cast<Eigen::Index>(2 * obs_.size()); }
  const AngleObs& operator[](std::size_t i) const { return obs_[i]; }
  const std::vector<AngleObs>& observations() const { return obs_; }

  std::vector<double> epochs() const {
    std::vector<double> e;
    for (const auto& o : obs_) e.push_back(o.epoch);
    return e;
  }

  Eigen::VectorXd stacked_values() const {
    Eigen::VectorXd z(dim());
    for (std::size_t i = 0; i < obs_.size(); ++i) z.segment<2>(2 * static_cast<Eigen::Index>(i)) << obs_[i].alpha, obs_[i].beta;
    return z;
  }

  Eigen::MatrixXd stacked_cov() const {
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(dim(), dim());
    for (std::size_t i = 0; i < obs_.size(); ++i) {
      const auto k = 2 * static_cast<Eigen::Index>(i);
      r.block<2, 2>(k, k) = obs_[i].noise_cov;
    }
    return r;
  }

  /// W with W' W = R^-1, block-diagonal like R.
  Eigen::MatrixXd whitening() const {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(dim(), dim());
    for (std::size_t i = 0; i < obs_.size(); ++i) {
      const auto k = 2 * static_cast<Eigen::Index>(i);
      const Eigen::Matrix2d l = obs_[i].noise_cov.llt().matrixL();
      w.block<2, 2>(k, k) = l.triangularView<Eigen::Lower>().solve(Eigen::Matrix2d::Identity());
    }
    return w;
  }

 private:
  std::vector<AngleObs> obs_;
};

inline double arcsec_to_rad(double arcsec) { return arcsec * std::numbers::pi / 648000.0; }

/// Right ascension and declination of the target seen from the observer.
/// On the pole (dx = dy = 0) alpha is 0.
inline Eigen::Vector2d angles(const Eigen::Vector3d& target_r, const Eigen::Vector3d& observer_r) {
  const Eigen::Vector3d d = target_r - observer_r;
  const double rho = d.norm();
  if (rho == 0.0) throw DomainError("angles: target and observer positions coincide");
  const double alpha = std::atan2(d.y(), d.x());
  const double beta = std::asin(std::clamp(d.z() / rho, -1.0, 1.0));
  return {alpha == -std::numbers::pi ? std::numbers::pi : alpha, beta};
}

/// Propagates the observer's apolune state by `span`.
inline StateVec observer_state(double span, const dynamics::CrtbpParams& params, const StateVec& apolune,
                               const dynamics::IntegratorOptions& opt = {}) {
  return dynamics::propagate(apolune, 0.0, span, params, opt);
}

/// Angles polynomials of one epoch from a flow map and a fixed observer.
inline std::vector<polyalg::TruncatedPoly> angles_poly(const polyalg::PolyMap& flow, const Eigen::Vector3d& observer_r) {
  using polyalg::TruncatedPoly;
  const TruncatedPoly dx = flow[0] - observer_r.x();
  const TruncatedPoly dy = flow[1] - observer_r.y();
  const TruncatedPoly dz = flow[2] - observer_r.z();
  const TruncatedPoly rho2 = dx * dx + dy * dy + dz * dz;
  if (!(rho2.constant_part() > 0.0)) throw DomainError("angles: target and observer positions coincide");
  return {polyalg::atan2(dy, dx), polyalg::asin(dz * polyalg::pow(rho2, -0.5))};
}

/// Stacked measurement polynomial g(dx0) over all epochs.
struct MeasurementExpansion {
  polyalg::PolyMap map;
  std::vector<double> epochs;
  std::vector<StateVec> observer_states;
  StateVec ref_state;
  double t0 = 0.0;

  Eigen::Index dim() const { return static_cast<Eigen::Index>(map.size()); }
};

inline MeasurementExpansion measurement_expansion(const std::vector<dynamics::FlowExpansion>& flows,
                                                  const std::vector<StateVec>& observers) {
  if (flows.empty() || flows.size() != observers.size())
    throw ContractViolation("measurement_expansion needs one observer state per flow");
  MeasurementExpansion m;
  m.ref_state = flows.front().ref_state;
  m.t0 = flows.front().t0;
  std::vector<polyalg::TruncatedPoly> comps;
  for (std::size_t i = 0; i < flows.size(); ++i) {
    const auto& f = flows[i];
    if (f.ref_state != m.ref_state || f.t0 != m.t0)
      throw ContractViolation("flows must share the reference state and initial epoch");
    if (i > 0 && !(f.t1 > flows[i - 1].t1)) throw ContractViolation("flow epochs must be strictly increasing");
    for (auto& c : angles_poly(f.map, observers[i].head<3>())) comps.push_back(std::move(c));
    m.epochs.push_back(f.t1);
  }
  m.map = polyalg::PolyMap(std::move(comps));
  m.observer_states = observers;
  return m;
}

/// Noise-free stacked angles of a trajectory started at state0 (full
/// nonlinear propagation).
inline Eigen::VectorXd predict_angles(const StateVec& state0, double t0, const std::vector<double>& epochs,
                                      const std::vector<StateVec>& observers, const dynamics::CrtbpParams& params,
                                      const dynamics::IntegratorOptions& opt = {}) {
  if (epochs.size() != observers.size()) throw ContractViolation("predict_angles needs one observer per epoch");
  Eigen::VectorXd z(2 * static_cast<Eigen::Index>(epochs.size()));
  StateVec s = state0;
  double t = t0;
  for (std::size_t i = 0; i < epochs.size(); ++i) {
    s = dynamics::propagate(s, t, epochs[i], params, opt);
    t = epochs[i];
    z.segment<2>(2 * static_cast<Eigen::Index>(i)) = angles(s.head<3>(), observers[i].head<3>());
  }
  return z;
}

/// Predicted-minus-observed angles. Wrap-around is not corrected: the
/// scenario residuals are far below pi, and a larger one is a setup error.
inline Eigen::VectorXd angle_residual(const Eigen::VectorXd& predicted, const Eigen::VectorXd& observed) {
  if (predicted.size() != observed.size()) throw ContractViolation("angle_residual: dimension mismatch");
  const Eigen::VectorXd r = predicted - observed;
  if (!(r.cwiseAbs().maxCoeff() < std::numbers::pi)) throw DomainError("angle residual reaches pi (branch wrap)");
  return r;
}

/// Truth observations: dv is added to the velocity right after t0, the
/// trajectory is propagated to each epoch and `noise` (2 per epoch, rad) added.
inline ObservationSet synthesize_observation(const StateVec& true_state0, const Eigen::Vector3d& dv, double t0,
                                             const std::vector<double>& epochs, const std::vector<StateVec>& observers,
                                             const Eigen::VectorXd& noise, double noise_std_rad,
                                             const dynamics::CrtbpParams& params,
                                             const dynamics::IntegratorOptions& opt = {}) {
  if (noise.size() != 2 * static_cast<Eigen::Index>(epochs.size()))
    throw ContractViolation("synthesize_observation needs two noise draws per epoch");
  StateVec s0 = true_state0;
  s0.tail<3>() += dv;
  const Eigen::VectorXd z = predict_angles(s0, t0, epochs, observers, params, opt) + noise;
  const Eigen::Matrix2d r = Eigen::Matrix2d::Identity() * noise_std_rad * noise_std_rad;
  std::vector<AngleObs> obs;
  for (std::size_t i = 0; i < epochs.size(); ++i) {
    const auto k = 2 * static_cast<Eigen::Index>(i);
    double a = z[k];
    if (a > std::numbers::pi) a -= 2.0 * std::numbers::pi;
    if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
    obs.push_back({epochs[i], a, z[k + 1], r});
  }
  return ObservationSet(std::move(obs));
}

}  // namespace cdmi::observation

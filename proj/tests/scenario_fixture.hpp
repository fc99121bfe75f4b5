#pragma once

// Standard single- and three-epoch scenario built directly from the
// lower-level modules (no harness), shared by the rpo and indicator tests.

#include <memory>
#include <vector>

#include "cdmi/rpo/solver.hpp"

namespace cdmi::testing {

struct MiniScenario {
  dynamics::CrtbpParams params;
  dynamics::StateVec target;
  std::vector<double> epochs;
  std::vector<dynamics::StateVec> observers;
  observation::MeasurementExpansion meas;
  std::unique_ptr<stats::GaussianState> prior;
  double noise_std = 0.0;

  observation::ObservationSet observe(const dynamics::StateVec& err, const Eigen::Vector3d& dv,
                                      const Eigen::VectorXd& noise) const {
    return observation::synthesize_observation(target + err, dv, 0.0, epochs, observers, noise, noise_std, params);
  }

  rpo::CaseInputs inputs(const observation::ObservationSet& obs) const { return {&meas, &obs, prior.get(), params, {}}; }
};

inline dynamics::StateVec state(double a, double b, double c, double d, double e, double f) {
  dynamics::StateVec s;
  s << a, b, c, d, e, f;
  return s;
}

inline std::unique_ptr<MiniScenario> make_scenario(int epochs_count, int order = 5) {
  auto s = std::make_unique<MiniScenario>();
  const double T = 2.26679784217712, t_obs = 1.51119865689808;
  s->target = state(1.07523949148639, 0, -0.202146176080457, 0, -0.192431661980241, 0);
  const dynamics::StateVec observer0 = state(1.02202815472411, 0, -0.182101352652963, 0, -0.103270818092086, 0);
  const double t1 = 3.0 * T;
  for (int k = 0; k < epochs_count; ++k) s->epochs.push_back(t1 + 0.01 * k * T);
  for (double t : s->epochs)
    s->observers.push_back(observation::observer_state(t - t1 + 0.85 * t_obs, s->params, observer0));
  s->meas = observation::measurement_expansion(
      dynamics::flow_expansions(s->target, 0.0, s->epochs, order, s->params), s->observers);
  const double sr = 1.0 / s->params.length_unit_km, sv = 1e-4 / s->params.velocity_unit_km_s;
  Eigen::Matrix<double, 6, 1> var;
  var << sr * sr, sr * sr, sr * sr, sv * sv, sv * sv, sv * sv;
  s->prior = std::make_unique<stats::GaussianState>(s->target, var.asDiagonal().toDenseMatrix());
  s->noise_std = observation::arcsec_to_rad(5.0);
  return s;
}

inline dynamics::StateVec table4_error() {
  return state(-6.0909e-7, 4.1082e-6, 1.9964e-6, 6.3217e-5, 1.4865e-4, -2.2854e-5);
}
inline Eigen::Vector3d table4_dv() { return {-8.5834e-4, 2.7464e-4, -3.7482e-4}; }
inline Eigen::VectorXd table4_noise() { return Eigen::Vector2d(-1.1380e-5, 1.3152e-5); }

}  // namespace cdmi::testing

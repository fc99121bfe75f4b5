#pragma once

#include <chrono>
#include <cmath>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cdmi/dynamics/flow.hpp"
#include "cdmi/harness/config.hpp"
#include "cdmi/indicator/cdmi.hpp"
#include "cdmi/observation/obs_file.hpp"
#include "cdmi/rpo/solver.hpp"

namespace cdmi::harness {

using dynamics::StateVec;

/// Prepared scenario. Expansions are built once and shared read-only by
/// every copy (rescaled sweeps, worker threads).
struct Scenario {
  ScenarioConfig cfg;
  StateVec target;
  std::vector<double> epochs;
  std::vector<StateVec> observers;
  std::shared_ptr<const observation::MeasurementExpansion> meas;
  Eigen::Vector3d cgt_direction = Eigen::Vector3d::Zero();
  std::shared_ptr<const stats::GaussianState> prior;
  double noise_std_rad = 0.0;
  double build_seconds = 0.0;

  std::size_t measurement_dim() const { return 2 * epochs.size(); }

  double dv_ms_to_nd(double ms) const { return ms / 1000.0 / cfg.params.velocity_unit_km_s; }

  rpo::CaseInputs inputs(const observation::ObservationSet& obs) const {
    return {meas.get(), &obs, prior.get(), cfg.params, cfg.integrator};
  }

  indicator::IndicatorOptions indicator_options(bool trace = false) const {
    indicator::IndicatorOptions o;
    o.rpo.eta = cfg.eta;
    o.rpo.max_iterations = cfg.max_iterations;
    o.rpo.trace = trace;
    o.threshold = cfg.decision_threshold;
    o.grid_step = cfg.grid_step;
    o.eps1 = cfg.eps1;
    o.eps2 = cfg.eps2;
    o.max_samples = cfg.max_samples;
    return o;
  }

  /// Truth = estimate + err, dv (nd) applied at t0, noise (rad) added.
  observation::ObservationSet observe(const StateVec& err, const Eigen::Vector3d& dv_nd,
                                      const Eigen::VectorXd& noise) const {
    return observation::synthesize_observation(target + err, dv_nd, 0.0, epochs, observers, noise, noise_std_rad,
                                               cfg.params, cfg.integrator);
  }
};

namespace detail {

inline StateVec to_state(const std::array<double, 6>& a) { return StateVec(a.data()); }

inline void set_statistics(Scenario& s) {
  const auto& c = s.cfg;
  const double sr = c.sigma_r_km / c.params.length_unit_km;
  const double sv = c.sigma_v_ms / 1000.0 / c.params.velocity_unit_km_s;
  const double k = std::pow(10.0, c.p0_scale_exp);
  Eigen::Matrix<double, 6, 1> var;
  var << sr * sr, sr * sr, sr * sr, sv * sv, sv * sv, sv * sv;
  s.prior = std::make_shared<stats::GaussianState>(s.target, (k * var).asDiagonal().toDenseMatrix());
  s.noise_std_rad = observation::arcsec_to_rad(c.noise_arcsec) * std::sqrt(std::pow(10.0, c.r_scale_exp));
}

}  // namespace detail

inline Scenario build_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  const auto t_start = std::chrono::steady_clock::now();
  Scenario s;
  s.cfg = cfg;
  s.target = detail::to_state(cfg.target_apolune);
  const StateVec observer0 = detail::to_state(cfg.observer_apolune);
  const double t1 = cfg.t1_periods * cfg.target_period;
  s.epochs.push_back(t1);
  for (double o : cfg.extra_epoch_offsets_periods) s.epochs.push_back(t1 + o * cfg.target_period);
  for (double t : s.epochs)
    s.observers.push_back(observation::observer_state(t - t1 + cfg.observer_offset_periods * cfg.observer_period,
                                                      cfg.params, observer0, cfg.integrator));
  const auto flows = dynamics::flow_expansions(s.target, 0.0, s.epochs, cfg.poly_order, cfg.params, cfg.integrator);
  s.cgt_direction = dynamics::stm_and_cgt_direction(flows.front());
  s.meas = std::make_shared<observation::MeasurementExpansion>(observation::measurement_expansion(flows, s.observers));
  detail::set_statistics(s);
  s.build_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return s;
}

/// Same expansions, new covariance scale exponents.
inline Scenario rescaled(const Scenario& base, double p0_scale_exp, double r_scale_exp) {
  Scenario s = base;
  s.cfg.p0_scale_exp = p0_scale_exp;
  s.cfg.r_scale_exp = r_scale_exp;
  s.cfg.validate();
  detail::set_statistics(s);
  return s;
}

inline StateVec table4_error() {
  StateVec e;
  e << -6.0909e-7, 4.1082e-6, 1.9964e-6, 6.3217e-5, 1.4865e-4, -2.2854e-5;
  return e;
}
inline Eigen::Vector3d table4_dv_nd() { return {-8.5834e-4, 2.7464e-4, -3.7482e-4}; }
inline Eigen::Vector2d table4_noise() { return {-1.1380e-5, 1.3152e-5}; }

struct DetectionRun {
  std::string case_id;
  observation::ObservationSet obs;
  indicator::DetectionReport report;
};

inline observation::ObservationSet case_observation(const Scenario& s, const std::string& case_id) {
  if (case_id == "table4-nonmaneuver" || case_id == "table4-maneuver") {
    if (s.epochs.size() != 1)
      throw ConfigError("case '" + case_id + "' is defined for the single-epoch scenario only");
    const Eigen::Vector3d dv = case_id == "table4-maneuver" ? table4_dv_nd() : Eigen::Vector3d::Zero();
    return s.observe(table4_error(), dv, table4_noise());
  }
  if (case_id == "custom") {
    const auto& c = s.cfg.custom;
    if (!c.observation_file.empty()) {
      std::ifstream in(c.observation_file);
      if (!in) throw ConfigError("cannot read observation file '" + c.observation_file + "'");
      std::stringstream ss;
      ss << in.rdbuf();
      auto obs = observation::observation_from_json(parse_json_text(ss.str(), c.observation_file));
      if (obs.epochs() != s.epochs) throw ConfigError("observation file epochs do not match the scenario epochs");
      return obs;
    }
    StateVec err = StateVec::Zero();
    if (!c.error_nd.empty()) err = StateVec(c.error_nd.data());
    Eigen::Vector3d dv = Eigen::Vector3d::Zero();
    if (!c.dv_ms.empty()) dv = Eigen::Vector3d(c.dv_ms.data()) / 1000.0 / s.cfg.params.velocity_unit_km_s;
    Eigen::VectorXd noise = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.measurement_dim()));
    if (!c.noise_rad.empty()) {
      if (c.noise_rad.size() != s.measurement_dim())
        throw ConfigError("field 'custom.noise_rad': needs " + std::to_string(s.measurement_dim()) + " entries");
      noise = Eigen::Map<const Eigen::VectorXd>(c.noise_rad.data(), static_cast<Eigen::Index>(c.noise_rad.size()));
    }
    return s.observe(err, dv, noise);
  }
  throw ConfigError("unknown case '" + case_id + "' (expected table4-nonmaneuver, table4-maneuver or custom)");
}

inline indicator::DetectionReport detect(const Scenario& s, const observation::ObservationSet& obs,
                                         indicator::Mode mode, std::optional<double> alpha_x, bool trace = false) {
  const auto opt = s.indicator_options(trace);
  const auto f = indicator::sampler(s.inputs(obs), opt.rpo);
  const auto t0 = std::chrono::steady_clock::now();
  indicator::DetectionReport rep;
  switch (mode) {
    case indicator::Mode::single:
      if (!alpha_x) throw ContractViolation("single mode requires alpha_x");
      rep = indicator::cdmi_single(*alpha_x, f);
      break;
    case indicator::Mode::integrated_dense:
      if (alpha_x) throw ContractViolation("integrated modes do not take alpha_x");
      rep = indicator::integrate_dense(f, opt.grid_step, opt.threshold);
      break;
    case indicator::Mode::integrated_adaptive:
      if (alpha_x) throw ContractViolation("integrated modes do not take alpha_x");
      rep = indicator::integrate_adaptive(f, opt.eps1, opt.eps2, opt.threshold, opt.max_samples);
      break;
  }
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

inline DetectionRun run_one(const Scenario& s, const std::string& case_id, indicator::Mode mode,
                            std::optional<double> alpha_x = std::nullopt, bool trace = false) {
  auto obs = case_observation(s, case_id);
  auto rep = detect(s, obs, mode, alpha_x, trace);
  return {case_id, std::move(obs), std::move(rep)};
}

}  // namespace cdmi::harness

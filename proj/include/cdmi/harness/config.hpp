#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "cdmi/dynamics/crtbp.hpp"
#include "cdmi/dynamics/runge_kutta.hpp"
#include "cdmi/errors.hpp"

namespace cdmi::harness {

using json = nlohmann::json;

/// Values for the `custom` case. Empty vectors mean zero; an observation
/// file, when given, replaces the synthesized measurement.
struct CustomCase {
  std::vector<double> error_nd;
  std::vector<double> dv_ms;
  std::vector<double> noise_rad;
  std::string observation_file;
};

struct ScenarioConfig {
  std::array<double, 6> target_apolune{1.07523949148639, 0.0, -0.202146176080457, 0.0, -0.192431661980241, 0.0};
  double target_period = 2.26679784217712;
  std::array<double, 6> observer_apolune{1.02202815472411, 0.0, -0.182101352652963, 0.0, -0.103270818092086, 0.0};
  double observer_period = 1.51119865689808;
  dynamics::CrtbpParams params;

  double t1_periods = 3.0;
  std::vector<double> extra_epoch_offsets_periods;
  double observer_offset_periods = 0.85;

  double sigma_r_km = 1.0;
  double sigma_v_ms = 0.1;
  double noise_arcsec = 5.0;
  double p0_scale_exp = 0.0;
  double r_scale_exp = 0.0;

  int poly_order = 5;
  double eta = 1e-6;
  int max_iterations = 50;
  double eps1 = 0.01;
  double eps2 = 0.02;
  double grid_step = 0.01;
  int max_samples = 64;
  double decision_threshold = 0.5;

  dynamics::IntegratorOptions integrator;
  CustomCase custom;

  void validate() const {
    params.validate();
    auto pos = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("field '") + name + "': must be positive");
    };
    pos(target_period, "target_period");
    pos(observer_period, "observer_period");
    pos(t1_periods, "t1_periods");
    pos(sigma_r_km, "sigma_r_km");
    pos(sigma_v_ms, "sigma_v_ms");
    pos(noise_arcsec, "noise_arcsec");
    pos(eta, "eta");
    pos(eps1, "eps1");
    pos(eps2, "eps2");
    pos(grid_step, "grid_step");
    pos(integrator.rel_tol, "integrator.rel_tol");
    pos(integrator.abs_tol, "integrator.abs_tol");
    pos(integrator.min_step, "integrator.min_step");
    if (!std::isfinite(p0_scale_exp) || !std::isfinite(r_scale_exp))
      throw ConfigError("field 'p0_scale_exp'/'r_scale_exp': must be finite");
    if (!std::isfinite(observer_offset_periods)) throw ConfigError("field 'observer_offset_periods': must be finite");
    if (poly_order < 1) throw ConfigError("field 'poly_order': must be >= 1");
    if (max_iterations < 1) throw ConfigError("field 'max_iterations': must be >= 1");
    if (max_samples < 3) throw ConfigError("field 'max_samples': must be >= 3");
    if (!(decision_threshold >= 0.0 && decision_threshold <= 1.0))
      throw ConfigError("field 'decision_threshold': must lie in [0, 1]");
    const long n = std::lround(1.0 / grid_step);
    if (std::abs(static_cast<double>(n) * grid_step - 1.0) > 1e-9)
      throw ConfigError("field 'grid_step': must divide 1 evenly");
    double prev = 0.0;
    for (double o : extra_epoch_offsets_periods) {
      if (!(o > prev)) throw ConfigError("field 'extra_epoch_offsets_periods': must be positive and strictly increasing");
      prev = o;
    }
    try {
      dynamics::tableau_by_name(integrator.rk_set);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("field 'integrator.rk_set': ") + e.what());
    }
    if (!custom.error_nd.empty() && custom.error_nd.size() != 6)
      throw ConfigError("field 'custom.error_nd': needs 6 entries");
    if (!custom.dv_ms.empty() && custom.dv_ms.size() != 3) throw ConfigError("field 'custom.dv_ms': needs 3 entries");
  }

  std::size_t epoch_count() const { return 1 + extra_epoch_offsets_periods.size(); }
};

namespace detail {

template <class T>
void read_field(const json& j, const std::string& prefix, const char* key, T& out) {
  if (!j.contains(key)) return;
  if constexpr (std::is_integral_v<T>) {
    const json& v = j.at(key);
    if (!v.is_number_integer() && !(v.is_number_float() && std::floor(v.get<double>()) == v.get<double>()))
      throw ConfigError("field '" + prefix + key + "': expected an integer");
  }
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("field '" + prefix + key + "': wrong type (" + std::string(j.at(key).type_name()) + ")");
  }
}

inline void reject_unknown(const json& j, const std::string& prefix, const std::set<std::string>& known) {
  if (!j.is_object()) throw ConfigError("field '" + prefix + "': expected an object");
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw ConfigError("unknown config key '" + prefix + k + "'");
}

inline int line_of_offset(const std::string& text, std::size_t byte) {
  int line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) line += text[i] == '\n';
  return line;
}

}  // namespace detail

inline ScenarioConfig config_from_json(const json& j) {
  using detail::read_field;
  ScenarioConfig c;
  detail::reject_unknown(j, "",
                         {"target_apolune", "target_period", "observer_apolune", "observer_period", "mu",
                          "length_unit_km", "velocity_unit_km_s", "time_unit_s", "t1_periods",
                          "extra_epoch_offsets_periods", "observer_offset_periods", "sigma_r_km", "sigma_v_ms",
                          "noise_arcsec", "p0_scale_exp", "r_scale_exp", "poly_order", "eta", "max_iterations", "eps1",
                          "eps2", "grid_step", "max_samples", "decision_threshold", "integrator", "custom"});
  read_field(j, "", "target_apolune", c.target_apolune);
  read_field(j, "", "target_period", c.target_period);
  read_field(j, "", "observer_apolune", c.observer_apolune);
  read_field(j, "", "observer_period", c.observer_period);
  read_field(j, "", "mu", c.params.mu);
  read_field(j, "", "length_unit_km", c.params.length_unit_km);
  read_field(j, "", "velocity_unit_km_s", c.params.velocity_unit_km_s);
  read_field(j, "", "time_unit_s", c.params.time_unit_s);
  read_field(j, "", "t1_periods", c.t1_periods);
  read_field(j, "", "extra_epoch_offsets_periods", c.extra_epoch_offsets_periods);
  read_field(j, "", "observer_offset_periods", c.observer_offset_periods);
  read_field(j, "", "sigma_r_km", c.sigma_r_km);
  read_field(j, "", "sigma_v_ms", c.sigma_v_ms);
  read_field(j, "", "noise_arcsec", c.noise_arcsec);
  read_field(j, "", "p0_scale_exp", c.p0_scale_exp);
  read_field(j, "", "r_scale_exp", c.r_scale_exp);
  read_field(j, "", "poly_order", c.poly_order);
  read_field(j, "", "eta", c.eta);
  read_field(j, "", "max_iterations", c.max_iterations);
  read_field(j, "", "eps1", c.eps1);
  read_field(j, "", "eps2", c.eps2);
  read_field(j, "", "grid_step", c.grid_step);
  read_field(j, "", "max_samples", c.max_samples);
  read_field(j, "", "decision_threshold", c.decision_threshold);
  if (j.contains("integrator")) {
    const json& ji = j.at("integrator");
    detail::reject_unknown(ji, "integrator.", {"rel_tol", "abs_tol", "min_step", "max_steps", "initial_step", "rk_set"});
    read_field(ji, "integrator.", "rel_tol", c.integrator.rel_tol);
    read_field(ji, "integrator.", "abs_tol", c.integrator.abs_tol);
    read_field(ji, "integrator.", "min_step", c.integrator.min_step);
    read_field(ji, "integrator.", "max_steps", c.integrator.max_steps);
    read_field(ji, "integrator.", "initial_step", c.integrator.initial_step);
    read_field(ji, "integrator.", "rk_set", c.integrator.rk_set);
  }
  if (j.contains("custom")) {
    const json& jc = j.at("custom");
    detail::reject_unknown(jc, "custom.", {"error_nd", "dv_ms", "noise_rad", "observation_file"});
    read_field(jc, "custom.", "error_nd", c.custom.error_nd);
    read_field(jc, "custom.", "dv_ms", c.custom.dv_ms);
    read_field(jc, "custom.", "noise_rad", c.custom.noise_rad);
    read_field(jc, "custom.", "observation_file", c.custom.observation_file);
  }
  c.validate();
  return c;
}

inline json config_to_json(const ScenarioConfig& c) {
  json j;
  j["target_apolune"] = c.target_apolune;
  j["target_period"] = c.target_period;
  j["observer_apolune"] = c.observer_apolune;
  j["observer_period"] = c.observer_period;
  j["mu"] = c.params.mu;
  j["length_unit_km"] = c.params.length_unit_km;
  j["velocity_unit_km_s"] = c.params.velocity_unit_km_s;
  j["time_unit_s"] = c.params.time_unit_s;
  j["t1_periods"] = c.t1_periods;
  j["extra_epoch_offsets_periods"] = c.extra_epoch_offsets_periods;
  j["observer_offset_periods"] = c.observer_offset_periods;
  j["sigma_r_km"] = c.sigma_r_km;
  j["sigma_v_ms"] = c.sigma_v_ms;
  j["noise_arcsec"] = c.noise_arcsec;
  j["p0_scale_exp"] = c.p0_scale_exp;
  j["r_scale_exp"] = c.r_scale_exp;
  j["poly_order"] = c.poly_order;
  j["eta"] = c.eta;
  j["max_iterations"] = c.max_iterations;
  j["eps1"] = c.eps1;
  j["eps2"] = c.eps2;
  j["grid_step"] = c.grid_step;
  j["max_samples"] = c.max_samples;
  j["decision_threshold"] = c.decision_threshold;
  j["integrator"] = {{"rel_tol", c.integrator.rel_tol},
                     {"abs_tol", c.integrator.abs_tol},
                     {"min_step", c.integrator.min_step},
                     {"max_steps", c.integrator.max_steps},
                     {"initial_step", c.integrator.initial_step},
                     {"rk_set", c.integrator.rk_set}};
  j["custom"] = {{"error_nd", c.custom.error_nd},
                 {"dv_ms", c.custom.dv_ms},
                 {"noise_rad", c.custom.noise_rad},
                 {"observation_file", c.custom.observation_file}};
  return j;
}

/// Parses JSON text; syntax errors are reported with their line number.
inline json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ":" + std::to_string(detail::line_of_offset(text, e.byte)) + ": " + e.what());
  }
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return config_from_json(parse_json_text(ss.str(), path));
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    throw ConfigError(msg.rfind(path, 0) == 0 ? msg : path + ": " + msg);
  }
}

/// Applies `key=value` (dotted keys for nested objects). The value is read as
/// JSON when it parses, otherwise as a string; the result is re-validated.
inline ScenarioConfig apply_overrides(const ScenarioConfig& base, const std::vector<std::string>& overrides) {
  json j = config_to_json(base);
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + o + "' is not key=value");
    const std::string key = o.substr(0, eq), text = o.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    json* node = &j;
    std::string rest = key;
    for (auto dot = rest.find('.'); dot != std::string::npos; dot = rest.find('.')) {
      const std::string head = rest.substr(0, dot);
      if (!node->is_object() || !node->contains(head)) throw ConfigError("unknown config key '" + key + "'");
      node = &(*node)[head];
      rest = rest.substr(dot + 1);
    }
    if (!node->is_object() || !node->contains(rest)) throw ConfigError("unknown config key '" + key + "'");
    (*node)[rest] = value;
  }
  return config_from_json(j);
}

}  // namespace cdmi::harness

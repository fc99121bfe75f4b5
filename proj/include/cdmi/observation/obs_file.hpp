#pragma once

#include <json.hpp>
#include <string>

#include "cdmi/errors.hpp"
#include "cdmi/observation/angles.hpp"

namespace cdmi::observation {

/// {"epochs_nd": [...], "alpha_rad": [...], "beta_rad": [...], "noise_std_arcsec": s}
/// with an isotropic per-epoch noise covariance.
inline nlohmann::json observation_to_json(const ObservationSet& set, double noise_std_arcsec) {
  nlohmann::json j;
  j["epochs_nd"] = nlohmann::json::array();
  j["alpha_rad"] = nlohmann::json::array();
  j["beta_rad"] = nlohmann::json::array();
  for (const auto& o : set.observations()) {
    j["epochs_nd"].push_back(o.epoch);
    j["alpha_rad"].push_back(o.alpha);
    j["beta_rad"].push_back(o.beta);
  }
  j["noise_std_arcsec"] = noise_std_arcsec;
  return j;
}

inline ObservationSet observation_from_json(const nlohmann::json& j) {
  try {
    const auto e = j.at("epochs_nd").get<std::vector<double>>();
    const auto a = j.at("alpha_rad").get<std::vector<double>>();
    const auto b = j.at("beta_rad").get<std::vector<double>>();
    const double s = arcsec_to_rad(j.at("noise_std_arcsec").get<double>());
    if (e.size() != a.size() || e.size() != b.size())
      throw ConfigError("observation file: epochs_nd, alpha_rad and beta_rad differ in length");
    if (!(s > 0.0)) throw ConfigError("observation file: noise_std_arcsec must be positive");
    std::vector<AngleObs> obs;
    for (std::size_t i = 0; i < e.size(); ++i) obs.push_back({e[i], a[i], b[i], Eigen::Matrix2d::Identity() * s * s});
    return ObservationSet(std::move(obs));
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("observation file: ") + ex.what());
  } catch (const ContractViolation& ex) {
    throw ConfigError(std::string("observation file: ") + ex.what());
  }
}

}  // namespace cdmi::observation

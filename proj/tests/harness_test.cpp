#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "cdmi/harness/output.hpp"
#include "scenario_fixture.hpp"

namespace h = cdmi::harness;
namespace ind = cdmi::indicator;

namespace {

std::vector<std::vector<std::string>> split_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST(Config, DefaultsMirrorStandardCase) {
  const auto c = h::config_from_json(h::json::object());
  EXPECT_EQ(c.sigma_r_km, 1.0);
  EXPECT_EQ(c.sigma_v_ms, 0.1);
  EXPECT_EQ(c.noise_arcsec, 5.0);
  EXPECT_EQ(c.poly_order, 5);
  EXPECT_EQ(c.epoch_count(), 1u);
  EXPECT_EQ(c.integrator.rk_set, "rkf78");
  EXPECT_NEAR(c.t1_periods * c.target_period, 6.8004, 5e-5);
}

TEST(Config, RoundTrip) {
  auto c = h::config_from_json(h::json::object());
  c.extra_epoch_offsets_periods = {0.01, 0.02};
  c.integrator.rk_set = "dop853";
  const auto back = h::config_from_json(h::config_to_json(c));
  EXPECT_EQ(h::config_to_json(back).dump(), h::config_to_json(c).dump());
}

TEST(Config, RejectsUnknownAndMistyped) {
  EXPECT_THROW(h::config_from_json({{"sigma_rr_km", 1.0}}), cdmi::ConfigError);
  EXPECT_THROW(h::config_from_json({{"integrator", {{"tol", 1e-9}}}}), cdmi::ConfigError);
  EXPECT_THROW(h::config_from_json({{"sigma_r_km", "one"}}), cdmi::ConfigError);
  EXPECT_THROW(h::config_from_json({{"poly_order", 2.5}}), cdmi::ConfigError);
  EXPECT_THROW(h::config_from_json({{"poly_order", 0}}), cdmi::ConfigError);
  EXPECT_THROW(h::config_from_json({{"grid_step", 0.3}}), cdmi::ConfigError);
  EXPECT_THROW(h::config_from_json({{"integrator", {{"rk_set", "rk4"}}}}), cdmi::ConfigError);
  EXPECT_THROW(h::config_from_json({{"extra_epoch_offsets_periods", {0.02, 0.01}}}), cdmi::ConfigError);
  try {
    h::config_from_json({{"sigma_r_km", "one"}});
  } catch (const cdmi::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("sigma_r_km"), std::string::npos);
  }
}

TEST(Config, SyntaxErrorReportsLine) {
  try {
    h::parse_json_text("{\n  \"eta\": 1e-6,\n  \"eps1\": ,\n}", "base.json");
    FAIL();
  } catch (const cdmi::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("base.json:3"), std::string::npos) << e.what();
  }
}

TEST(Config, Overrides) {
  const auto base = h::config_from_json(h::json::object());
  const auto c = h::apply_overrides(base, {"sigma_r_km=2", "integrator.rk_set=dop853", "extra_epoch_offsets_periods=[0.01,0.02]"});
  EXPECT_EQ(c.sigma_r_km, 2.0);
  EXPECT_EQ(c.integrator.rk_set, "dop853");
  EXPECT_EQ(c.epoch_count(), 3u);
  EXPECT_THROW(h::apply_overrides(base, {"nope=1"}), cdmi::ConfigError);
  EXPECT_THROW(h::apply_overrides(base, {"integrator.nope=1"}), cdmi::ConfigError);
  EXPECT_THROW(h::apply_overrides(base, {"sigma_r_km"}), cdmi::ConfigError);
  EXPECT_THROW(h::apply_overrides(base, {"poly_order=abc"}), cdmi::ConfigError);
}

class HarnessScenario : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { scn_ = new h::Scenario(h::build_scenario(h::config_from_json(h::json::object()))); }
  static void TearDownTestSuite() { delete scn_; }
  static h::Scenario* scn_;
};
h::Scenario* HarnessScenario::scn_ = nullptr;

TEST_F(HarnessScenario, UnitConversions) {
  const auto& P = scn_->prior->cov();
  EXPECT_NEAR(std::sqrt(P(0, 0)), 2.6015e-6, 1e-10);
  EXPECT_NEAR(std::sqrt(P(3, 3)), 9.7604e-5, 1e-9);
  EXPECT_EQ(P(0, 0), std::pow(1.0 / 384400.0, 2));
  EXPECT_NEAR(scn_->noise_std_rad, 5.0 * std::numbers::pi / 648000.0, 1e-20);
  EXPECT_NEAR(scn_->epochs[0], 6.8004, 5e-5);
}

TEST_F(HarnessScenario, MatchesLowLevelAssembly) {
  const auto mini = cdmi::testing::make_scenario(1);
  EXPECT_EQ(scn_->epochs, mini->epochs);
  EXPECT_EQ(scn_->observers[0], mini->observers[0]);
  EXPECT_EQ(scn_->meas->map.constant_part(), mini->meas.map.constant_part());
  EXPECT_EQ(scn_->prior->cov(), mini->prior->cov());
}

TEST_F(HarnessScenario, CustomPerfectConsistency) {
  const auto run = h::run_one(*scn_, "custom", ind::Mode::integrated_adaptive);
  EXPECT_LT(*run.report.P, 0.05);
  EXPECT_FALSE(run.report.flag);
}

TEST_F(HarnessScenario, ModeAlphaContract) {
  EXPECT_THROW(h::run_one(*scn_, "custom", ind::Mode::single), cdmi::ContractViolation);
  EXPECT_THROW(h::run_one(*scn_, "custom", ind::Mode::integrated_dense, 0.5), cdmi::ContractViolation);
  EXPECT_FALSE(h::run_one(*scn_, "table4-maneuver", ind::Mode::single, 1.0).report.flag);
  EXPECT_THROW(h::run_one(*scn_, "table5", ind::Mode::single, 0.5), cdmi::ConfigError);
}

TEST_F(HarnessScenario, Table4NeedsSingleEpoch) {
  auto cfg = scn_->cfg;
  cfg.extra_epoch_offsets_periods = {0.01, 0.02};
  cfg.poly_order = 2;
  const auto s3 = h::build_scenario(cfg);
  EXPECT_EQ(s3.epochs.size(), 3u);
  EXPECT_THROW(h::case_observation(s3, "table4-maneuver"), cdmi::ConfigError);
}

TEST_F(HarnessScenario, CustomObservationFile) {
  const auto obs = h::case_observation(*scn_, "table4-maneuver");
  const auto path = std::filesystem::temp_directory_path() / "cdmi_obs_test.json";
  h::atomic_write(path, cdmi::observation::observation_to_json(obs, 5.0).dump());
  auto s = *scn_;
  s.cfg.custom.observation_file = path.string();
  const auto back = h::case_observation(s, "custom");
  EXPECT_EQ(back.stacked_values(), obs.stacked_values());
  std::filesystem::remove(path);
}

TEST(Rng, SubstreamsAreStable) {
  const auto a = h::draw_run(7, 3, 2), b = h::draw_run(7, 3, 2), c = h::draw_run(7, 4, 2), d = h::draw_run(8, 3, 2);
  EXPECT_EQ(a.z_state, b.z_state);
  EXPECT_EQ(a.z_noise, b.z_noise);
  EXPECT_EQ(a.direction, b.direction);
  EXPECT_NE(a.z_state, c.z_state);
  EXPECT_NE(a.z_state, d.z_state);
  EXPECT_NEAR(a.direction.norm(), 1.0, 1e-15);
}

TEST(Rng, DirectionsIsotropic) {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  const int n = 20000;
  for (int i = 0; i < n; ++i) mean += h::draw_run(1, static_cast<std::uint64_t>(i), 2).direction;
  mean /= n;
  EXPECT_LT(mean.norm(), 0.03);
}

TEST_F(HarnessScenario, CampaignIndependentOfJobs) {
  h::CampaignSpec spec;
  spec.runs_per_class = 3;
  spec.seed = 11;
  spec.jobs = 1;
  const auto a = h::run_mc(*scn_, spec);
  spec.jobs = 4;
  const auto b = h::run_mc(*scn_, spec);
  EXPECT_EQ(h::runs_csv(a, 2), h::runs_csv(b, 2));
  EXPECT_EQ(h::summary_json(*scn_, spec, a).dump(), h::summary_json(*scn_, spec, b).dump());
  EXPECT_EQ(a.records.size(), 6u);
  for (const auto& r : a.records) {
    EXPECT_TRUE(r.ok) << r.message;
    if (!r.maneuver) EXPECT_EQ(r.dv_nd, Eigen::Vector3d::Zero());
    else EXPECT_NEAR(r.dv_nd.norm(), scn_->dv_ms_to_nd(1.0), 1e-18);
  }
  EXPECT_EQ(a.runs_maneuver, 3);
  EXPECT_EQ(a.runs_non_maneuver, 3);
}

TEST_F(HarnessScenario, RunsCsvRoundTrip) {
  h::CampaignSpec spec;
  spec.runs_per_class = 2;
  spec.seed = 5;
  const auto m = h::run_mc(*scn_, spec);
  const auto rows = split_csv(h::runs_csv(m, 2));
  ASSERT_EQ(rows.size(), m.records.size() + 1);
  EXPECT_EQ(rows[0][2], "error_nd_0");
  for (std::size_t k = 0; k < m.records.size(); ++k) {
    const auto& r = m.records[k];
    const auto& row = rows[k + 1];
    for (int i = 0; i < 6; ++i) EXPECT_EQ(std::stod(row[2 + static_cast<std::size_t>(i)]), r.error_nd[i]);
    for (int i = 0; i < 2; ++i) EXPECT_EQ(std::stod(row[8 + static_cast<std::size_t>(i)]), r.noise_rad[i]);
    for (int i = 0; i < 3; ++i) EXPECT_EQ(std::stod(row[10 + static_cast<std::size_t>(i)]), r.dv_nd[i]);
    EXPECT_EQ(std::stod(row[13]), *r.P);
  }
}

TEST_F(HarnessScenario, IdentityScaleReproducesBaseline) {
  h::CampaignSpec spec;
  spec.runs_per_class = 2;
  spec.seed = 9;
  const auto base = h::run_mc(*scn_, spec);
  const auto sweep = h::run_sweep(*scn_, h::SweepParam::p0_scale_exp, {0.0}, spec);
  EXPECT_EQ(h::runs_csv(base, 2), h::runs_csv(sweep[0].summary, 2));
}

TEST_F(HarnessScenario, DvSweepClassSemantics) {
  h::CampaignSpec spec;
  spec.runs_per_class = 2;
  const auto sweep = h::run_sweep(*scn_, h::SweepParam::dv, {0.0, 1.0}, spec);
  EXPECT_EQ(sweep[0].summary.runs_maneuver, 0);
  EXPECT_EQ(sweep[0].summary.runs_non_maneuver, 2);
  EXPECT_FALSE(sweep[0].summary.accuracy_maneuver.has_value());
  EXPECT_EQ(sweep[1].summary.runs_maneuver, 2);
  EXPECT_EQ(sweep[1].summary.runs_non_maneuver, 0);
}

TEST(Summary, AccuracyDefinitions) {
  std::vector<h::McRunRecord> rec(5);
  rec[0].maneuver = false, rec[0].ok = true, rec[0].flag = false;
  rec[1].maneuver = false, rec[1].ok = true, rec[1].flag = true;
  rec[2].maneuver = true, rec[2].ok = true, rec[2].flag = true;
  rec[3].maneuver = true, rec[3].ok = true, rec[3].flag = true;
  rec[4].maneuver = true, rec[4].ok = false;
  const auto m = h::summarize(rec);
  EXPECT_EQ(*m.accuracy_non_maneuver, 0.5);
  EXPECT_EQ(*m.accuracy_maneuver, 1.0);
  EXPECT_EQ(m.accuracy_overall, 0.75);
  EXPECT_EQ(m.failed, 1);
}

TEST(Sensitivity, SeparationAngle) {
  const Eigen::Vector3d axis(0.0, 0.6, 0.8);
  EXPECT_NEAR(h::separation_angle(2.0 * axis, axis), 0.0, 1e-7);
  EXPECT_NEAR(h::separation_angle(-axis, axis), 0.0, 1e-7);
  EXPECT_NEAR(h::separation_angle(Eigen::Vector3d(1, 0, 0), axis), std::numbers::pi / 2, 1e-15);
  EXPECT_THROW(h::separation_angle(Eigen::Vector3d::Zero(), axis), cdmi::DomainError);
}

TEST(Output, AtomicWriteAndPaths) {
  const auto dir = std::filesystem::temp_directory_path() / "cdmi_out_test";
  std::filesystem::remove_all(dir);
  h::atomic_write(dir / "a.txt", "x\n");
  h::atomic_write(dir / "a.txt", "y\n");
  std::ifstream in(dir / "a.txt");
  std::string s;
  std::getline(in, s);
  EXPECT_EQ(s, "y");
  EXPECT_EQ(std::distance(std::filesystem::directory_iterator(dir), std::filesystem::directory_iterator()), 1);
  std::filesystem::remove_all(dir);
  const auto p = h::CampaignPaths::from("out/s.json");
  EXPECT_EQ(p.runs, std::filesystem::path("out/s.runs.csv"));
  EXPECT_EQ(h::CampaignPaths::from("out").summary, std::filesystem::path("out/summary.json"));
}

TEST_F(HarnessScenario, DvSweepAccuracyGrowsWithMagnitude) {
  h::CampaignSpec spec;
  spec.runs_per_class = 150;
  spec.seed = 3;
  const auto sweep = h::run_sweep(*scn_, h::SweepParam::dv, {0.1, 0.5, 1.0}, spec);
  for (std::size_t i = 1; i < sweep.size(); ++i)
    EXPECT_GE(*sweep[i].summary.accuracy_maneuver, *sweep[i - 1].summary.accuracy_maneuver - 0.05) << i;
  EXPECT_GT(*sweep[2].summary.accuracy_maneuver, *sweep[0].summary.accuracy_maneuver);
}

TEST_F(HarnessScenario, MissedManeuversPointAwayFromSensitiveAxis) {
  h::CampaignSpec spec;
  spec.runs_per_class = 300;
  spec.seed = 42;
  spec.non_maneuver_class = false;
  const auto m = h::run_mc(*scn_, spec);
  std::vector<double> hit, miss;
  for (const auto& r : h::sensitivity_report(*scn_, m)) (r.flag ? hit : miss).push_back(r.separation_rad);
  ASSERT_FALSE(miss.empty());
  ASSERT_FALSE(hit.empty());
  EXPECT_GT(h::median(miss), h::median(hit));
}

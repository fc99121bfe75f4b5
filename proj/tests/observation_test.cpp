#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cdmi/observation/obs_file.hpp"
#include "test_util.hpp"

using cdmi::dynamics::CrtbpParams;
using cdmi::dynamics::StateVec;
using cdmi::observation::angles;
using cdmi::observation::AngleObs;
using cdmi::observation::ObservationSet;

namespace {

constexpr double kPi = std::numbers::pi;

StateVec sv(double a, double b, double c, double d, double e, double f) {
  StateVec s;
  s << a, b, c, d, e, f;
  return s;
}

const StateVec kTarget = sv(1.07523949148639, 0, -0.202146176080457, 0, -0.192431661980241, 0);
const double kT = 2.26679784217712;
const StateVec kObserver = sv(1.02202815472411, 0, -0.182101352652963, 0, -0.103270818092086, 0);
const double kTObs = 1.51119865689808;

StateVec sigma_diag() {
  const CrtbpParams p;
  const double sr = 1.0 / p.length_unit_km;
  const double s_v = 1e-4 / p.velocity_unit_km_s;
  return sv(sr, sr, sr, s_v, s_v, s_v);
}

StateVec truncated_normal(std::mt19937_64& rng, const StateVec& sig) {
  std::normal_distribution<double> g(0.0, 1.0);
  StateVec d;
  for (int i = 0; i < 6; ++i) {
    double z;
    do z = g(rng);
    while (std::abs(z) > 3.0);
    d[i] = z * sig[i];
  }
  return d;
}

// Observer position at scenario epoch t, placed 0.85 periods past apolune at t1.
StateVec observer_at(double t, double t1) {
  return cdmi::observation::observer_state(t - t1 + 0.85 * kTObs, CrtbpParams{}, kObserver);
}

}  // namespace

TEST(Angles, AxisExamples) {
  const Eigen::Vector3d o = Eigen::Vector3d::Zero();
  Eigen::Vector2d a = angles(Eigen::Vector3d(1, 0, 0), o);
  EXPECT_EQ(a[0], 0.0);
  EXPECT_EQ(a[1], 0.0);
  a = angles(Eigen::Vector3d(0, 1, 0), o);
  EXPECT_DOUBLE_EQ(a[0], kPi / 2);
  EXPECT_EQ(a[1], 0.0);
  a = angles(Eigen::Vector3d(0, 0, 1), o);
  EXPECT_EQ(a[0], 0.0);
  EXPECT_DOUBLE_EQ(a[1], kPi / 2);
  a = angles(Eigen::Vector3d(-1, -0.0, 0), o);
  EXPECT_DOUBLE_EQ(a[0], kPi);
  EXPECT_THROW(angles(Eigen::Vector3d(1, 2, 3), Eigen::Vector3d(1, 2, 3)), cdmi::DomainError);
}

TEST(Angles, BranchFollowsSigns) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const Eigen::Vector3d t(g(rng), g(rng), g(rng)), o(g(rng), g(rng), g(rng));
    const Eigen::Vector3d d = t - o;
    const Eigen::Vector2d a = angles(t, o);
    ASSERT_GT(a[0], -kPi);
    ASSERT_LE(a[0], kPi);
    ASSERT_LE(std::abs(a[1]), kPi / 2);
    EXPECT_EQ(std::signbit(std::sin(a[0])), std::signbit(d.y())) << i;
    EXPECT_EQ(std::cos(a[0]) < 0.0, d.x() < 0.0) << i;
    EXPECT_EQ(a[1] < 0.0, d.z() < 0.0) << i;
    EXPECT_NEAR(std::sin(a[1]), d.z() / d.norm(), 1e-15);
  }
}

TEST(ObservationSet, StackedCovarianceIsBlockDiagonal) {
  std::vector<AngleObs> obs;
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < 3; ++i) {
    Eigen::Matrix2d a;
    a << g(rng), g(rng), g(rng), g(rng);
    Eigen::Matrix2d c = (a * a.transpose() + Eigen::Matrix2d::Identity()) * 1e-10;
    c(1, 0) = c(0, 1);
    obs.push_back({1.0 + i, 0.1 * i, -0.2 * i, c});
  }
  const ObservationSet set(obs);
  const Eigen::MatrixXd r = set.stacked_cov();
  ASSERT_EQ(r.rows(), 6);
  const Eigen::MatrixXd rinv = r.inverse();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i == j) {
        const Eigen::Matrix2d bi = obs[static_cast<std::size_t>(i)].noise_cov.inverse();
        EXPECT_LT((rinv.block<2, 2>(2 * i, 2 * i) - bi).cwiseAbs().maxCoeff(), 1e-12 * bi.cwiseAbs().maxCoeff());
      } else {
        EXPECT_EQ((r.block<2, 2>(2 * i, 2 * j).cwiseAbs().maxCoeff()), 0.0);
        EXPECT_EQ((rinv.block<2, 2>(2 * i, 2 * j).cwiseAbs().maxCoeff()), 0.0);
      }
    }
  }
  const Eigen::MatrixXd w = set.whitening();
  EXPECT_LT((w.transpose() * w * r - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(set.stacked_values()[2], 0.1);
}

TEST(ObservationSet, RejectsBadInput) {
  const Eigen::Matrix2d r = Eigen::Matrix2d::Identity();
  EXPECT_THROW(ObservationSet({{1.0, 0, 0, r}, {1.0, 0, 0, r}}), cdmi::ContractViolation);
  EXPECT_THROW(ObservationSet({{1.0, 4.0, 0, r}}), cdmi::ContractViolation);
  EXPECT_THROW(ObservationSet({{1.0, 0, 0, -r}}), cdmi::ContractViolation);
  EXPECT_THROW(ObservationSet(std::vector<AngleObs>{}), cdmi::ContractViolation);
}

TEST(ObserverState, Examples) {
  const CrtbpParams p;
  EXPECT_EQ(cdmi::observation::observer_state(0.0, p, kObserver), kObserver);
  EXPECT_LT((cdmi::observation::observer_state(kTObs, p, kObserver) - kObserver).cwiseAbs().maxCoeff(), 1e-8);
  const StateVec ref = sv(1.0186477001714502, 0.02252420639757596, -0.16902216062442066, 0.0297055089027704,
                          -0.09137924884971074, -0.11679371912479042);
  EXPECT_LT((cdmi::observation::observer_state(0.85 * kTObs, p, kObserver) - ref).cwiseAbs().maxCoeff(), 1e-10);
}

class ScenarioMeasurement : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const double t1 = 3.0 * kT;
    epochs_ = {t1, t1 + 0.01 * kT, t1 + 0.02 * kT};
    for (double t : epochs_) observers_.push_back(observer_at(t, t1));
    flows_ = cdmi::dynamics::flow_expansions(kTarget, 0.0, epochs_, 5, CrtbpParams{});
  }
  static std::vector<double> epochs_;
  static std::vector<StateVec> observers_;
  static std::vector<cdmi::dynamics::FlowExpansion> flows_;
};
std::vector<double> ScenarioMeasurement::epochs_;
std::vector<StateVec> ScenarioMeasurement::observers_;
std::vector<cdmi::dynamics::FlowExpansion> ScenarioMeasurement::flows_;

TEST_F(ScenarioMeasurement, SingleEpochConstantPart) {
  const auto m = cdmi::observation::measurement_expansion({flows_[0]}, {observers_[0]});
  ASSERT_EQ(m.dim(), 2);
  const Eigen::VectorXd c = m.map.constant_part();
  // angles of the reference trajectory at t1 (scipy DOP853 reference)
  EXPECT_NEAR(c[0], -0.3787084711559565, 1e-9);
  EXPECT_NEAR(c[1], -0.49809664598751047, 1e-9);
  const Eigen::VectorXd direct =
      cdmi::observation::predict_angles(kTarget, 0.0, {epochs_[0]}, {observers_[0]}, CrtbpParams{});
  EXPECT_LT((c - direct).cwiseAbs().maxCoeff(), 1e-11);
}

TEST_F(ScenarioMeasurement, ThreeEpochStacking) {
  const auto m = cdmi::observation::measurement_expansion(flows_, observers_);
  ASSERT_EQ(m.dim(), 6);
  ASSERT_EQ(m.epochs, epochs_);
  const Eigen::VectorXd direct = cdmi::observation::predict_angles(kTarget, 0.0, epochs_, observers_, CrtbpParams{});
  EXPECT_LT((m.map.constant_part() - direct).cwiseAbs().maxCoeff(), 1e-11);
  for (int i = 0; i < 3; ++i) {
    const auto one = cdmi::observation::measurement_expansion({flows_[static_cast<std::size_t>(i)]},
                                                              {observers_[static_cast<std::size_t>(i)]});
    EXPECT_EQ(m.map[2 * static_cast<std::size_t>(i)], one.map[0]);
    EXPECT_EQ(m.map[2 * static_cast<std::size_t>(i) + 1], one.map[1]);
  }
  EXPECT_THROW(cdmi::observation::measurement_expansion({flows_[1], flows_[0]}, {observers_[1], observers_[0]}),
               cdmi::ContractViolation);
}

TEST_F(ScenarioMeasurement, ConvergesUnderHalving) {
  cdmi::dynamics::IntegratorOptions tight;
  tight.rel_tol = tight.abs_tol = 1e-14;
  std::mt19937_64 rng(8);
  std::vector<StateVec> samples;
  for (int k = 0; k < 100; ++k) samples.push_back(truncated_normal(rng, sigma_diag()));
  std::vector<std::vector<Eigen::VectorXd>> direct;
  for (int n : {3, 5}) {
    const auto flows = cdmi::dynamics::flow_expansions(kTarget, 0.0, {epochs_[0]}, n, CrtbpParams{}, tight);
    const auto m = cdmi::observation::measurement_expansion(flows, {observers_[0]});
    std::vector<double> h, err;
    double scale = 2.0;
    for (int level = 0; level < 6; ++level, scale *= 0.5) {
      if (direct.size() <= static_cast<std::size_t>(level)) {
        direct.emplace_back();
        for (const StateVec& d0 : samples)
          direct.back().push_back(cdmi::observation::predict_angles(kTarget + scale * d0, 0.0, {epochs_[0]},
                                                                    {observers_[0]}, CrtbpParams{}, tight));
      }
      double worst = 0.0;
      for (std::size_t k = 0; k < samples.size(); ++k)
        worst = std::max(worst, (m.map.eval(StateVec(scale * samples[k])) - direct[static_cast<std::size_t>(level)][k])
                                    .cwiseAbs()
                                    .maxCoeff());
      h.push_back(scale);
      err.push_back(worst);
    }
    EXPECT_GE(cdmi::testing::loglog_slope(h, err), n + 0.5) << "order " << n;
  }
}

TEST_F(ScenarioMeasurement, SynthesizedObservationConsistency) {
  const CrtbpParams p;
  const auto m = cdmi::observation::measurement_expansion(flows_, observers_);
  std::mt19937_64 rng(21);
  // small deviation so the truncation error of the order-5 map is negligible
  const StateVec d = 0.1 * truncated_normal(rng, sigma_diag());
  const double s = cdmi::observation::arcsec_to_rad(5.0);
  const auto obs = cdmi::observation::synthesize_observation(kTarget + d, Eigen::Vector3d::Zero(), 0.0, epochs_,
                                                             observers_, Eigen::VectorXd::Zero(6), s, p);
  ASSERT_EQ(obs.size(), 3u);
  EXPECT_EQ(obs.epochs(), epochs_);
  EXPECT_LT((obs.stacked_values() - m.map.eval(d)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_DOUBLE_EQ(obs[0].noise_cov(0, 0), s * s);
}

TEST_F(ScenarioMeasurement, Table4ManeuverAndNoise) {
  const CrtbpParams p;
  const Eigen::Vector3d dv(-8.5834e-4, 2.7464e-4, -3.7482e-4);
  EXPECT_NEAR(dv.norm() * p.velocity_unit_km_s * 1000.0, 1.0, 1e-5);
  Eigen::VectorXd noise(2);
  noise << -1.1380e-5, 1.3152e-5;
  const double s = cdmi::observation::arcsec_to_rad(5.0);
  const auto clean = cdmi::observation::synthesize_observation(kTarget, dv, 0.0, {epochs_[0]}, {observers_[0]},
                                                               Eigen::VectorXd::Zero(2), s, p);
  const auto noisy =
      cdmi::observation::synthesize_observation(kTarget, dv, 0.0, {epochs_[0]}, {observers_[0]}, noise, s, p);
  EXPECT_EQ(noisy.stacked_values(), clean.stacked_values() + noise);
  StateVec moved = kTarget;
  moved.tail<3>() += dv;
  EXPECT_EQ(clean.stacked_values(),
            cdmi::observation::predict_angles(moved, 0.0, {epochs_[0]}, {observers_[0]}, p));
}

TEST(AngleResidual, WrapIsRejected) {
  Eigen::VectorXd a(2), b(2);
  a << 3.1, 0.0;
  b << -3.1, 0.0;
  EXPECT_THROW(cdmi::observation::angle_residual(a, b), cdmi::DomainError);
  b << 3.0, 0.1;
  EXPECT_NEAR(cdmi::observation::angle_residual(a, b)[0], 0.1, 1e-15);
}

TEST(ObservationFile, RoundTrip) {
  const double s = cdmi::observation::arcsec_to_rad(5.0);
  const Eigen::Matrix2d r = Eigen::Matrix2d::Identity() * s * s;
  const ObservationSet set({{6.8003935265313601, -0.37870847115595651, -0.49809664598751047, r},
                            {6.8230615049530, 0.1, 0.2, r}});
  const auto j = cdmi::observation::observation_to_json(set, 5.0);
  const auto back = cdmi::observation::observation_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(back.stacked_values(), set.stacked_values());
  EXPECT_EQ(back.epochs(), set.epochs());
  EXPECT_EQ(back.stacked_cov(), set.stacked_cov());
  EXPECT_THROW(cdmi::observation::observation_from_json(nlohmann::json::parse(R"({"epochs_nd":[1]})")),
               cdmi::ConfigError);
  EXPECT_THROW(cdmi::observation::observation_from_json(nlohmann::json::parse(
                   R"({"epochs_nd":[1,2],"alpha_rad":[0],"beta_rad":[0],"noise_std_arcsec":5})")),
               cdmi::ConfigError);
}

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "cdmi/harness/scenario.hpp"

namespace cdmi::harness {

struct CampaignSpec {
  int runs_per_class = 300;
  double dv_ms = 1.0;
  std::uint64_t seed = 42;
  indicator::Mode mode = indicator::Mode::integrated_adaptive;
  std::optional<double> alpha_x;
  int jobs = 1;
  bool non_maneuver_class = true;
  bool maneuver_class = true;
  bool keep_curves = false;
};

struct McRunRecord {
  std::uint64_t run_id = 0;
  bool maneuver = false;
  StateVec error_nd = StateVec::Zero();
  Eigen::VectorXd noise_rad;
  Eigen::Vector3d dv_nd = Eigen::Vector3d::Zero();
  std::optional<double> P;
  bool flag = false;
  int iterations = 0;
  int samples = 0;
  bool monotone = true;
  bool ok = false;
  std::string message;
  double wall_seconds = 0.0;
  indicator::CdmiCurve curve;

  bool correct() const { return ok && flag == maneuver; }
};

struct McSummary {
  long runs_non_maneuver = 0;
  long runs_maneuver = 0;
  long failed = 0;
  long monotonicity_warnings = 0;
  std::optional<double> accuracy_non_maneuver;
  std::optional<double> accuracy_maneuver;
  double accuracy_overall = 0.0;
  double mean_samples = 0.0;
  double mean_iterations = 0.0;
  double mean_wall_seconds = 0.0;
  double median_wall_seconds = 0.0;
  std::vector<McRunRecord> records;
};

/// Independent stream per (seed, run_id); scheduling order never matters.
inline std::mt19937_64 run_rng(std::uint64_t seed, std::uint64_t run_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(run_id), static_cast<std::uint32_t>(run_id >> 32)};
  return std::mt19937_64(seq);
}

/// Standardized draws of one run: state error, measurement noise and maneuver
/// direction, scaled afterwards so sweeps over covariances share the same
/// underlying numbers.
struct RunDraws {
  Eigen::Matrix<double, 6, 1> z_state;
  Eigen::VectorXd z_noise;
  Eigen::Vector3d direction;
};

inline RunDraws draw_run(std::uint64_t seed, std::uint64_t run_id, std::size_t measurement_dim) {
  auto rng = run_rng(seed, run_id);
  std::normal_distribution<double> g(0.0, 1.0);
  RunDraws d;
  for (int i = 0; i < 6; ++i) d.z_state[i] = g(rng);
  d.z_noise.resize(static_cast<Eigen::Index>(measurement_dim));
  for (Eigen::Index i = 0; i < d.z_noise.size(); ++i) d.z_noise[i] = g(rng);
  do {
    for (int i = 0; i < 3; ++i) d.direction[i] = g(rng);
  } while (d.direction.norm() == 0.0);
  d.direction.normalize();
  return d;
}

inline McRunRecord run_mc_one(const Scenario& s, const CampaignSpec& spec, std::uint64_t run_id, bool maneuver) {
  McRunRecord r;
  r.run_id = run_id;
  r.maneuver = maneuver;
  const RunDraws d = draw_run(spec.seed, run_id, s.measurement_dim());
  r.error_nd = s.prior->chol() * d.z_state;
  r.noise_rad = s.noise_std_rad * d.z_noise;
  r.dv_nd = maneuver ? Eigen::Vector3d(s.dv_ms_to_nd(spec.dv_ms) * d.direction) : Eigen::Vector3d::Zero();
  try {
    const auto obs = s.observe(r.error_nd, r.dv_nd, r.noise_rad);
    auto rep = detect(s, obs, spec.mode, spec.alpha_x);
    r.P = rep.P;
    r.flag = rep.flag;
    r.iterations = rep.curve.total_iterations();
    r.samples = static_cast<int>(rep.curve.samples.size());
    r.monotone = rep.monotone;
    r.wall_seconds = rep.wall_seconds;
    if (spec.keep_curves) r.curve = std::move(rep.curve);
    r.ok = true;
  } catch (const std::exception& e) {
    r.ok = false;
    r.message = e.what();
  }
  return r;
}

inline McSummary summarize(std::vector<McRunRecord> records) {
  McSummary m;
  long ok_non = 0, ok_man = 0, good_non = 0, good_man = 0, ok_total = 0;
  double samples = 0.0, iters = 0.0, wall = 0.0;
  std::vector<double> walls;
  for (const auto& r : records) {
    (r.maneuver ? m.runs_maneuver : m.runs_non_maneuver) += 1;
    if (!r.ok) {
      ++m.failed;
      continue;
    }
    ++ok_total;
    if (!r.monotone) ++m.monotonicity_warnings;
    if (r.maneuver) {
      ++ok_man;
      good_man += r.flag;
    } else {
      ++ok_non;
      good_non += !r.flag;
    }
    samples += r.samples;
    iters += r.iterations;
    wall += r.wall_seconds;
    walls.push_back(r.wall_seconds);
  }
  if (ok_non) m.accuracy_non_maneuver = static_cast<double>(good_non) / static_cast<double>(ok_non);
  if (ok_man) m.accuracy_maneuver = static_cast<double>(good_man) / static_cast<double>(ok_man);
  if (ok_total) {
    m.accuracy_overall = static_cast<double>(good_non + good_man) / static_cast<double>(ok_total);
    m.mean_samples = samples / static_cast<double>(ok_total);
    m.mean_iterations = iters / static_cast<double>(ok_total);
    m.mean_wall_seconds = wall / static_cast<double>(ok_total);
    std::sort(walls.begin(), walls.end());
    const std::size_t n = walls.size();
    m.median_wall_seconds = n % 2 ? walls[n / 2] : 0.5 * (walls[n / 2 - 1] + walls[n / 2]);
  }
  m.records = std::move(records);
  return m;
}

/// Non-maneuver runs take ids [0, R), maneuver runs [R, 2R).
inline McSummary run_mc(const Scenario& s, const CampaignSpec& spec) {
  if (spec.runs_per_class <= 0) throw ContractViolation("run_mc: runs must be positive");
  if (!(spec.dv_ms >= 0.0) || !std::isfinite(spec.dv_ms)) throw ContractViolation("run_mc: dv must be finite and >= 0");
  const auto R = static_cast<std::uint64_t>(spec.runs_per_class);
  std::vector<std::pair<std::uint64_t, bool>> jobs;
  if (spec.non_maneuver_class)
    for (std::uint64_t i = 0; i < R; ++i) jobs.emplace_back(i, false);
  if (spec.maneuver_class)
    for (std::uint64_t i = 0; i < R; ++i) jobs.emplace_back(R + i, true);

  std::vector<McRunRecord> out(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) out[k] = run_mc_one(s, spec, jobs[k].first, jobs[k].second);
  };
  const int n_threads = std::max(1, std::min<int>(spec.jobs, static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return summarize(std::move(out));
}

enum class SweepParam { dv, p0_scale_exp, r_scale_exp };

inline SweepParam sweep_param_from_string(const std::string& s) {
  if (s == "dv") return SweepParam::dv;
  if (s == "p0_scale_exp") return SweepParam::p0_scale_exp;
  if (s == "r_scale_exp") return SweepParam::r_scale_exp;
  throw ConfigError("unknown sweep parameter '" + s + "' (expected dv, p0_scale_exp or r_scale_exp)");
}

inline std::string to_string(SweepParam p) {
  switch (p) {
    case SweepParam::dv: return "dv";
    case SweepParam::p0_scale_exp: return "p0_scale_exp";
    case SweepParam::r_scale_exp: return "r_scale_exp";
  }
  return "?";
}

struct SweepPoint {
  double value = 0.0;
  McSummary summary;
};

/// One campaign per value with the same seed. A dv point runs only the class
/// it defines (dv = 0 is the non-maneuver class); scale points run both.
inline std::vector<SweepPoint> run_sweep(const Scenario& base, SweepParam param, const std::vector<double>& values,
                                         CampaignSpec spec) {
  if (values.empty()) throw ContractViolation("run_sweep: no values");
  std::vector<SweepPoint> out;
  for (double v : values) {
    if (!std::isfinite(v)) throw ContractViolation("run_sweep: values must be finite");
    CampaignSpec sp = spec;
    McSummary sum;
    switch (param) {
      case SweepParam::dv:
        if (v < 0.0) throw ContractViolation("run_sweep: dv must be >= 0");
        sp.dv_ms = v;
        sp.non_maneuver_class = v == 0.0;
        sp.maneuver_class = v != 0.0;
        sum = run_mc(base, sp);
        break;
      case SweepParam::p0_scale_exp:
        sum = run_mc(rescaled(base, v, base.cfg.r_scale_exp), sp);
        break;
      case SweepParam::r_scale_exp:
        sum = run_mc(rescaled(base, base.cfg.p0_scale_exp, v), sp);
        break;
    }
    out.push_back({v, std::move(sum)});
  }
  return out;
}

struct SensitivityRow {
  std::uint64_t run_id = 0;
  double separation_rad = 0.0;
  bool ok = false;
  bool flag = false;
};

/// Angle in [0, pi/2] between a maneuver direction and the sensitivity axis.
inline double separation_angle(const Eigen::Vector3d& dv, const Eigen::Vector3d& axis) {
  if (dv.norm() == 0.0 || axis.norm() == 0.0) throw DomainError("separation_angle: zero vector");
  const double c = std::abs(dv.normalized().dot(axis.normalized()));
  return std::acos(std::min(1.0, c));
}

inline std::vector<SensitivityRow> sensitivity_report(const Scenario& s, const McSummary& m) {
  std::vector<SensitivityRow> rows;
  for (const auto& r : m.records) {
    if (!r.maneuver || r.dv_nd.norm() == 0.0) continue;
    rows.push_back({r.run_id, separation_angle(r.dv_nd, s.cgt_direction), r.ok, r.flag});
  }
  return rows;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace cdmi::harness

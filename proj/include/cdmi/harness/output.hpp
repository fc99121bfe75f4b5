#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "cdmi/harness/campaign.hpp"
#include "cdmi/indicator/curve_csv.hpp"

namespace cdmi::harness {

using indicator::format_g17;

/// Write to a sibling temp file, then rename over the target.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  const auto dir = path.parent_path();
  if (!dir.empty()) std::filesystem::create_directories(dir);
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write to '" + tmp.string() + "' failed");
  }
  std::filesystem::rename(tmp, path);
}

inline json opt_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline json curve_json(const indicator::CdmiCurve& c) {
  json a = json::array();
  for (const auto& s : c.samples) {
    json js{{"alpha_x", s.alpha_x}, {"alpha_z", s.alpha_z}, {"m_z", s.m_z}, {"iterations", s.iterations}};
    if (!s.trace.empty()) {
      js["trace"] = json::array();
      for (const auto& t : s.trace)
        js["trace"].push_back(
            {{"iteration", t.iteration}, {"step_norm", t.step_norm}, {"objective", t.objective}, {"lambda", t.lambda}});
    }
    a.push_back(js);
  }
  return a;
}

inline json report_json(const Scenario& s, const DetectionRun& run) {
  const auto& r = run.report;
  json j;
  j["case"] = run.case_id;
  j["mode"] = indicator::to_string(r.mode);
  j["flag"] = r.flag;
  j["P"] = opt_number(r.P);
  if (r.mode == indicator::Mode::single) j["alpha_x_used"] = r.alpha_x_used;
  j["samples"] = r.curve.samples.size();
  j["total_iterations"] = r.curve.total_iterations();
  j["monotone"] = r.monotone;
  j["curve"] = curve_json(r.curve);
  j["observation"] = observation::observation_to_json(run.obs, s.cfg.noise_arcsec);
  j["rk_set"] = s.cfg.integrator.rk_set;
  j["config"] = config_to_json(s.cfg);
  return j;
}

inline json threshold_table(const McSummary& m) {
  std::vector<double> P;
  std::vector<bool> cls;
  for (const auto& r : m.records)
    if (r.ok && r.P) {
      P.push_back(*r.P);
      cls.push_back(r.maneuver);
    }
  json a = json::array();
  if (P.empty()) return a;
  std::vector<double> th;
  for (int i = 0; i <= 20; ++i) th.push_back(i / 20.0);
  for (const auto& row : indicator::threshold_sweep(P, cls, th)) {
    a.push_back({{"threshold", row.threshold},
                  {"accuracy_non_maneuver", std::isnan(row.accuracy_non_maneuver) ? json(nullptr) : json(row.accuracy_non_maneuver)},
                  {"accuracy_maneuver", std::isnan(row.accuracy_maneuver) ? json(nullptr) : json(row.accuracy_maneuver)},
                  {"accuracy_overall", row.accuracy_overall}});
  }
  return a;
}

/// Deterministic summary: no wall-clock data.
inline json summary_json(const Scenario& s, const CampaignSpec& spec, const McSummary& m) {
  json j;
  j["mode"] = indicator::to_string(spec.mode);
  j["alpha_x"] = opt_number(spec.alpha_x);
  j["runs_per_class"] = spec.runs_per_class;
  j["dv_ms"] = spec.dv_ms;
  j["seed"] = spec.seed;
  j["runs_non_maneuver"] = m.runs_non_maneuver;
  j["runs_maneuver"] = m.runs_maneuver;
  j["failed_runs"] = m.failed;
  j["monotonicity_warnings"] = m.monotonicity_warnings;
  j["accuracy_non_maneuver"] = opt_number(m.accuracy_non_maneuver);
  j["accuracy_maneuver"] = opt_number(m.accuracy_maneuver);
  j["accuracy_overall"] = m.accuracy_overall;
  j["mean_samples"] = m.mean_samples;
  j["mean_iterations"] = m.mean_iterations;
  j["threshold_sweep"] = threshold_table(m);
  j["rk_set"] = s.cfg.integrator.rk_set;
  j["config"] = config_to_json(s.cfg);
  return j;
}

inline json timing_json(const Scenario& s, const McSummary& m) {
  return {{"expansion_build_seconds", s.build_seconds},
          {"mean_detection_seconds", m.mean_wall_seconds},
          {"median_detection_seconds", m.median_wall_seconds}};
}

inline std::string csv_escape(const std::string& v) {
  if (v.find_first_of(",\"\n") == std::string::npos) return v;
  std::string out = "\"";
  for (char c : v) out += c == '"' ? std::string("\"\"") : std::string(1, c == '\n' ? ' ' : c);
  return out + "\"";
}

inline std::string runs_csv(const McSummary& m, std::size_t measurement_dim) {
  std::ostringstream out;
  out << "run_id,class";
  for (int i = 0; i < 6; ++i) out << ",error_nd_" << i;
  for (std::size_t i = 0; i < measurement_dim; ++i) out << ",noise_rad_" << i;
  for (int i = 0; i < 3; ++i) out << ",dv_nd_" << i;
  out << ",P,flag,iterations,samples,monotone,status,message\n";
  for (const auto& r : m.records) {
    out << r.run_id << ',' << (r.maneuver ? "maneuver" : "non-maneuver");
    for (int i = 0; i < 6; ++i) out << ',' << format_g17(r.error_nd[i]);
    for (Eigen::Index i = 0; i < r.noise_rad.size(); ++i) out << ',' << format_g17(r.noise_rad[i]);
    for (int i = 0; i < 3; ++i) out << ',' << format_g17(r.dv_nd[i]);
    out << ',' << (r.P ? format_g17(*r.P) : "") << ',' << (r.ok ? (r.flag ? "1" : "0") : "") << ',' << r.iterations
        << ',' << r.samples << ',' << (r.monotone ? 1 : 0) << ',' << (r.ok ? "ok" : "failed") << ','
        << csv_escape(r.message) << '\n';
  }
  return out.str();
}

inline std::string curves_csv(const McSummary& m) {
  std::string out = indicator::kCurveCsvHeader;
  for (const auto& r : m.records) out += indicator::curve_csv_rows("run_" + std::to_string(r.run_id), r.curve);
  return out;
}

inline std::string sensitivity_csv(const std::vector<SensitivityRow>& rows) {
  std::string out = "run_id,separation_angle_rad,status,flag\n";
  for (const auto& r : rows)
    out += std::to_string(r.run_id) + "," + format_g17(r.separation_rad) + "," + (r.ok ? "ok" : "failed") + "," +
           (r.ok ? (r.flag ? "1" : "0") : "") + "\n";
  return out;
}

/// Output set for a campaign. `out` ending in .json names the summary file
/// and the siblings share its stem; otherwise `out` is a directory.
struct CampaignPaths {
  std::filesystem::path summary, runs, curves, sensitivity, timing;

  static CampaignPaths from(const std::filesystem::path& out) {
    CampaignPaths p;
    if (out.extension() == ".json") {
      const auto dir = out.parent_path();
      const auto stem = out.stem().string();
      p.summary = out;
      p.runs = dir / (stem + ".runs.csv");
      p.curves = dir / (stem + ".curves.csv");
      p.sensitivity = dir / (stem + ".sensitivity.csv");
      p.timing = dir / (stem + ".timing.json");
    } else {
      p.summary = out / "summary.json";
      p.runs = out / "runs.csv";
      p.curves = out / "curves.csv";
      p.sensitivity = out / "sensitivity.csv";
      p.timing = out / "timing.json";
    }
    return p;
  }
};

}  // namespace cdmi::harness

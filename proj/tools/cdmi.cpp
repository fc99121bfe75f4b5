// cdmi: command-line front end for propagation, detection, Monte Carlo
// campaigns, sweeps and curve export.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cdmi/harness/output.hpp"

namespace h = cdmi::harness;
namespace ind = cdmi::indicator;

namespace {

struct Common {
  std::string config_path;
  std::string out;
  std::string rk_set;
  std::vector<std::string> overrides;
};

h::ScenarioConfig load(const Common& c) {
  h::ScenarioConfig cfg = c.config_path.empty() ? h::config_from_json(h::json::object()) : h::load_config(c.config_path);
  auto ov = c.overrides;
  if (!c.rk_set.empty()) ov.push_back("integrator.rk_set=" + c.rk_set);
  return h::apply_overrides(cfg, ov);
}

void add_common(CLI::App* sub, Common& c, bool out_required = true) {
  sub->add_option("--config", c.config_path, "scenario config (JSON); defaults reproduce the standard case")
      ->check(CLI::ExistingFile);
  auto* o = sub->add_option("--out", c.out, "output path");
  if (out_required) o->required();
  sub->add_option("--rk-set", c.rk_set, "RK78 coefficient set (rkf78, dop853)");
  sub->add_option("overrides", c.overrides, "key=value config overrides");
}

std::string dump(const h::json& j) { return j.dump(2) + "\n"; }

std::vector<double> vec(const cdmi::dynamics::StateVec& s) { return {s.data(), s.data() + s.size()}; }

int cmd_propagate(const Common& c) {
  const auto cfg = load(c);
  using cdmi::dynamics::StateVec;
  const StateVec target(cfg.target_apolune.data()), observer(cfg.observer_apolune.data());
  auto orbit = [&](const StateVec& s0, double T) {
    const StateVec s1 = cdmi::dynamics::propagate(s0, 0.0, T, cfg.params, cfg.integrator);
    return h::json{{"apolune", vec(s0)},
                   {"period", T},
                   {"state_after_one_period", vec(s1)},
                   {"closure_gap_nd", (s1 - s0).norm()},
                   {"jacobi_drift", cdmi::dynamics::jacobi_constant(s1, cfg.params) -
                                        cdmi::dynamics::jacobi_constant(s0, cfg.params)}};
  };
  h::json j;
  j["target"] = orbit(target, cfg.target_period);
  j["observer"] = orbit(observer, cfg.observer_period);
  const double t1 = cfg.t1_periods * cfg.target_period;
  std::vector<double> epochs{t1};
  for (double o : cfg.extra_epoch_offsets_periods) epochs.push_back(t1 + o * cfg.target_period);
  j["epochs"] = h::json::array();
  StateVec s = target;
  double t = 0.0;
  for (double te : epochs) {
    s = cdmi::dynamics::propagate(s, t, te, cfg.params, cfg.integrator);
    t = te;
    const StateVec obs = cdmi::observation::observer_state(te - t1 + cfg.observer_offset_periods * cfg.observer_period,
                                                           cfg.params, observer, cfg.integrator);
    const auto ang = cdmi::observation::angles(s.head<3>(), obs.head<3>());
    j["epochs"].push_back({{"epoch_nd", te},
                           {"target_state", vec(s)},
                           {"observer_state", vec(obs)},
                           {"alpha_rad", ang[0]},
                           {"beta_rad", ang[1]}});
  }
  j["rk_set"] = cfg.integrator.rk_set;
  j["config"] = h::config_to_json(cfg);
  h::atomic_write(c.out, dump(j));
  return 0;
}

std::optional<double> alpha_opt(const CLI::Option* o, double v) {
  return o->count() ? std::optional<double>(v) : std::nullopt;
}

void check_mode_alpha(ind::Mode mode, const std::optional<double>& a) {
  if (mode == ind::Mode::single && !a) throw cdmi::ConfigError("--mode single requires --alpha-x");
  if (mode != ind::Mode::single && a) throw cdmi::ConfigError("--alpha-x is only valid with --mode single");
  if (a && !(*a >= 0.0 && *a <= 1.0)) throw cdmi::ConfigError("--alpha-x must lie in [0, 1]");
}

int cmd_detect(const Common& c, const std::string& case_id, const std::string& mode_s, std::optional<double> alpha,
               bool trace) {
  const auto mode = ind::mode_from_string(mode_s);
  check_mode_alpha(mode, alpha);
  const auto scn = h::build_scenario(load(c));
  const auto run = h::run_one(scn, case_id, mode, alpha, trace);
  h::atomic_write(c.out, dump(h::report_json(scn, run)));
  std::fprintf(stderr, "%s %s: flag=%s%s (%zu samples, %.3f s)\n", case_id.c_str(), mode_s.c_str(),
               run.report.flag ? "true" : "false",
               run.report.P ? (" P=" + ind::format_g17(*run.report.P)).c_str() : "", run.report.curve.samples.size(),
               run.report.wall_seconds);
  return 0;
}

void write_campaign(const h::Scenario& scn, const h::CampaignSpec& spec, const h::McSummary& m,
                    const h::CampaignPaths& p, bool curves) {
  h::atomic_write(p.runs, h::runs_csv(m, scn.measurement_dim()));
  if (curves) h::atomic_write(p.curves, h::curves_csv(m));
  if (m.runs_maneuver > 0) h::atomic_write(p.sensitivity, h::sensitivity_csv(h::sensitivity_report(scn, m)));
  h::atomic_write(p.timing, dump(h::timing_json(scn, m)));
  h::atomic_write(p.summary, dump(h::summary_json(scn, spec, m)));
  if (m.failed) std::fprintf(stderr, "warning: %ld runs failed (see runs.csv)\n", m.failed);
  if (m.monotonicity_warnings)
    std::fprintf(stderr, "warning: %ld curves were not monotone within 1e-6\n", m.monotonicity_warnings);
}

int cmd_mc(const Common& c, h::CampaignSpec spec, const std::string& mode_s, bool curves) {
  spec.mode = ind::mode_from_string(mode_s);
  check_mode_alpha(spec.mode, spec.alpha_x);
  if (spec.runs_per_class <= 0) throw cdmi::ConfigError("--runs must be positive");
  if (!(spec.dv_ms >= 0.0)) throw cdmi::ConfigError("--dv-ms must be >= 0");
  spec.keep_curves = curves;
  const auto scn = h::build_scenario(load(c));
  const auto m = h::run_mc(scn, spec);
  write_campaign(scn, spec, m, h::CampaignPaths::from(c.out), curves);
  auto acc = [](const std::optional<double>& v) { return v ? *v : std::nan(""); };
  std::fprintf(stderr, "accuracy: non-maneuver %.4f, maneuver %.4f, overall %.4f\n", acc(m.accuracy_non_maneuver),
               acc(m.accuracy_maneuver), m.accuracy_overall);
  return m.failed == static_cast<long>(m.records.size()) ? 1 : 0;
}

int cmd_sweep(const Common& c, h::CampaignSpec spec, const std::string& mode_s, const std::string& param_s,
              const std::vector<double>& values) {
  spec.mode = ind::mode_from_string(mode_s);
  check_mode_alpha(spec.mode, spec.alpha_x);
  const auto param = h::sweep_param_from_string(param_s);
  if (values.empty()) throw cdmi::ConfigError("--values needs at least one value");
  if (spec.runs_per_class <= 0) throw cdmi::ConfigError("--runs must be positive");
  const auto scn = h::build_scenario(load(c));
  const auto points = h::run_sweep(scn, param, values, spec);
  h::json j;
  j["param"] = h::to_string(param);
  j["points"] = h::json::array();
  std::string csv = "value,runs,failed,accuracy_non_maneuver,accuracy_maneuver,accuracy_overall\n";
  auto cell = [](const std::optional<double>& v) { return v ? ind::format_g17(*v) : std::string(); };
  for (const auto& p : points) {
    h::CampaignSpec sp = spec;
    if (param == h::SweepParam::dv) sp.dv_ms = p.value;
    const auto sc = param == h::SweepParam::p0_scale_exp   ? h::rescaled(scn, p.value, scn.cfg.r_scale_exp)
                    : param == h::SweepParam::r_scale_exp ? h::rescaled(scn, scn.cfg.p0_scale_exp, p.value)
                                                          : scn;
    h::json s = h::summary_json(sc, sp, p.summary);
    s.erase("config");
    s["value"] = p.value;
    j["points"].push_back(s);
    csv += ind::format_g17(p.value) + "," + std::to_string(p.summary.records.size()) + "," +
           std::to_string(p.summary.failed) + "," + cell(p.summary.accuracy_non_maneuver) + "," +
           cell(p.summary.accuracy_maneuver) + "," + ind::format_g17(p.summary.accuracy_overall) + "\n";
  }
  j["rk_set"] = scn.cfg.integrator.rk_set;
  j["config"] = h::config_to_json(scn.cfg);
  const auto paths = h::CampaignPaths::from(c.out);
  h::atomic_write(paths.runs.parent_path() / (paths.summary.stem().string() + ".sweep.csv"), csv);
  h::atomic_write(paths.summary, dump(j));
  return 0;
}

int cmd_curve(const Common& c, const std::string& case_id, const std::string& mode_s) {
  const auto mode = ind::mode_from_string(mode_s);
  if (mode == ind::Mode::single) throw cdmi::ConfigError("curve export needs an integrated mode");
  const auto scn = h::build_scenario(load(c));
  const auto run = h::run_one(scn, case_id, mode);
  h::atomic_write(c.out, std::string(ind::kCurveCsvHeader) + ind::curve_csv_rows(case_id, run.report.curve));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Confidence-dominance maneuver indicator"};
  app.require_subcommand(1);

  Common common;
  std::string case_id = "table4-maneuver", mode = "integrated-adaptive", param;
  double alpha_x = 0.0;
  bool trace = false, curves = false;
  std::vector<double> values;
  h::CampaignSpec spec;
  spec.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  auto* propagate = app.add_subcommand("propagate", "propagate the target and observer orbits");
  add_common(propagate, common);

  auto* detect = app.add_subcommand("detect", "run one detection case");
  add_common(detect, common);
  detect->add_option("--case", case_id, "table4-nonmaneuver, table4-maneuver or custom");
  detect->add_option("--mode", mode, "single, integrated-dense or integrated-adaptive");
  auto* det_alpha = detect->add_option("--alpha-x", alpha_x, "state confidence for single mode");
  detect->add_flag("--trace", trace, "record per-iteration optimizer traces");

  auto* mc = app.add_subcommand("mc", "Monte Carlo campaign");
  add_common(mc, common);
  mc->add_option("--runs", spec.runs_per_class, "runs per class")->capture_default_str();
  mc->add_option("--dv-ms", spec.dv_ms, "maneuver magnitude (m/s)")->capture_default_str();
  mc->add_option("--seed", spec.seed, "campaign seed")->capture_default_str();
  mc->add_option("--mode", mode, "single, integrated-dense or integrated-adaptive");
  auto* mc_alpha = mc->add_option("--alpha-x", alpha_x, "state confidence for single mode");
  mc->add_option("--jobs", spec.jobs, "worker threads")->check(CLI::PositiveNumber);
  mc->add_flag("--curves", curves, "also write per-run curves");

  auto* sweep = app.add_subcommand("sweep", "campaigns over a parameter");
  add_common(sweep, common);
  sweep->add_option("--param", param, "dv, p0_scale_exp or r_scale_exp")->required();
  sweep->add_option("--values", values, "comma-separated values")->delimiter(',')->required();
  sweep->add_option("--runs", spec.runs_per_class, "runs per class")->capture_default_str();
  sweep->add_option("--dv-ms", spec.dv_ms, "maneuver magnitude (m/s) for scale sweeps")->capture_default_str();
  sweep->add_option("--seed", spec.seed, "campaign seed")->capture_default_str();
  sweep->add_option("--mode", mode, "single, integrated-dense or integrated-adaptive");
  auto* sw_alpha = sweep->add_option("--alpha-x", alpha_x, "state confidence for single mode");
  sweep->add_option("--jobs", spec.jobs, "worker threads")->check(CLI::PositiveNumber);

  auto* curve = app.add_subcommand("curve", "export the alpha_x - alpha_z curve of one case");
  add_common(curve, common);
  curve->add_option("--case", case_id, "table4-nonmaneuver, table4-maneuver or custom");
  curve->add_option("--mode", mode, "integrated-dense or integrated-adaptive")->default_str("integrated-dense");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (propagate->parsed()) return cmd_propagate(common);
    if (detect->parsed()) return cmd_detect(common, case_id, mode, alpha_opt(det_alpha, alpha_x), trace);
    if (mc->parsed()) {
      spec.alpha_x = alpha_opt(mc_alpha, alpha_x);
      return cmd_mc(common, spec, mode, curves);
    }
    if (sweep->parsed()) {
      spec.alpha_x = alpha_opt(sw_alpha, alpha_x);
      return cmd_sweep(common, spec, mode, param, values);
    }
    if (curve->parsed()) {
      if (!curve->get_option("--mode")->count()) mode = "integrated-dense";
      return cmd_curve(common, case_id, mode);
    }
  } catch (const cdmi::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const cdmi::ContractViolation& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "detection failed: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

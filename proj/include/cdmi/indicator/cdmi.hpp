#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cdmi/rpo/solver.hpp"
#include "cdmi/stats/chi_square.hpp"

namespace cdmi::indicator {

struct CurveSample {
  double alpha_x = 0.0;
  double alpha_z = 0.0;
  double m_z = 0.0;
  int iterations = 0;
  std::vector<rpo::RpoIteration> trace;
};

/// Samples sorted by alpha_x.
struct CdmiCurve {
  std::vector<CurveSample> samples;

  /// alpha_z non-increasing in alpha_x within `slack`.
  bool monotone(double slack = 1e-6) const {
    for (std::size_t i = 1; i < samples.size(); ++i)
      if (samples[i].alpha_z > samples[i - 1].alpha_z + slack) return false;
    return true;
  }
  int total_iterations() const {
    int n = 0;
    for (const auto& s : samples) n += s.iterations;
    return n;
  }
};

enum class Mode { single, integrated_dense, integrated_adaptive };

inline std::string to_string(Mode m) {
  switch (m) {
    case Mode::single: return "single";
    case Mode::integrated_dense: return "integrated-dense";
    case Mode::integrated_adaptive: return "integrated-adaptive";
  }
  return "?";
}

inline Mode mode_from_string(const std::string& s) {
  if (s == "single") return Mode::single;
  if (s == "integrated-dense") return Mode::integrated_dense;
  if (s == "integrated-adaptive") return Mode::integrated_adaptive;
  throw ConfigError("unknown mode '" + s + "' (expected single, integrated-dense or integrated-adaptive)");
}

struct DetectionReport {
  Mode mode = Mode::single;
  bool flag = false;
  std::optional<double> P;
  double alpha_x_used = 0.0;  // single mode only
  CdmiCurve curve;
  bool monotone = true;
  double wall_seconds = 0.0;
};

struct IndicatorOptions {
  rpo::RpoOptions rpo;
  double threshold = 0.5;
  double grid_step = 0.01;
  double eps1 = 0.01;
  double eps2 = 0.02;
  int max_samples = 64;
};

using SampleFn = std::function<CurveSample(double)>;

/// One point of the alpha_x - alpha_z curve. The endpoints are closed form;
/// interior points run the optimizer, and a non-converged solve aborts.
inline CurveSample alpha_z_at(double alpha_x, const rpo::CaseInputs& c, const rpo::RpoOptions& opt = {}) {
  if (!(alpha_x >= 0.0 && alpha_x <= 1.0)) throw ContractViolation("alpha_x must lie in [0, 1]");
  const int dof = static_cast<int>(c.obs->dim());
  rpo::RpoResult r;
  if (alpha_x == 0.0 || alpha_x == 1.0) {
    r = rpo::closest_point_special(alpha_x, c, opt.stat_scale);
  } else {
    r = rpo::rpo_solve(c, stats::ConfidenceBudget::from_alpha(alpha_x), opt);
    if (!r.converged) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "optimizer did not converge at alpha_x = " << alpha_x << " after " << r.iterations << " iterations";
      throw ConvergenceError(msg.str());
    }
  }
  return {alpha_x, stats::chi2_cdf(r.m_z, dof), r.m_z, r.iterations, std::move(r.trace)};
}

inline SampleFn sampler(const rpo::CaseInputs& c, const rpo::RpoOptions& opt = {}) {
  return [c, opt](double a) { return alpha_z_at(a, c, opt); };
}

/// Composite trapezoid over (possibly non-uniform) sorted samples.
inline double trapezoid(const std::vector<CurveSample>& s) {
  double p = 0.0;
  for (std::size_t i = 1; i < s.size(); ++i) p += 0.5 * (s[i].alpha_z + s[i - 1].alpha_z) * (s[i].alpha_x - s[i - 1].alpha_x);
  return p;
}

/// Flags a maneuver when alpha_z > alpha_x; alpha_x = 1 is always false.
inline DetectionReport cdmi_single(double alpha_x, const SampleFn& f) {
  DetectionReport rep;
  rep.mode = Mode::single;
  rep.alpha_x_used = alpha_x;
  if (!(alpha_x >= 0.0 && alpha_x <= 1.0)) throw ContractViolation("alpha_x must lie in [0, 1]");
  const CurveSample s = alpha_x == 1.0 ? CurveSample{1.0, 0.0, 0.0, 0, {}} : f(alpha_x);
  rep.curve.samples = {s};
  rep.flag = alpha_x < 1.0 && s.alpha_z > alpha_x;
  return rep;
}

inline DetectionReport integrate_dense(const SampleFn& f, double grid_step, double threshold = 0.5) {
  if (!(grid_step > 0.0 && grid_step <= 1.0)) throw ContractViolation("grid step must lie in (0, 1]");
  const long n = std::lround(1.0 / grid_step);
  if (std::abs(static_cast<double>(n) * grid_step - 1.0) > 1e-9) throw ContractViolation("grid step must divide 1 evenly");
  DetectionReport rep;
  rep.mode = Mode::integrated_dense;
  for (long i = 0; i <= n; ++i) rep.curve.samples.push_back(f(static_cast<double>(i) / static_cast<double>(n)));
  rep.P = trapezoid(rep.curve.samples);
  rep.flag = *rep.P >= threshold;
  rep.monotone = rep.curve.monotone();
  return rep;
}

/// Adaptive sampling from the seeds {0, 0.5, 1}: refine where the linear
/// interpolation error of a consecutive triple is largest.
inline DetectionReport integrate_adaptive(const SampleFn& f, double eps1, double eps2, double threshold = 0.5,
                                          int max_samples = 64) {
  if (!(eps1 > 0.0) || !(eps2 > 0.0)) throw ContractViolation("adaptive thresholds must be positive");
  DetectionReport rep;
  rep.mode = Mode::integrated_adaptive;
  auto& s = rep.curve.samples;
  for (double a : {0.0, 0.5, 1.0}) s.push_back(f(a));

  for (;;) {
    std::size_t worst = 0;
    double worst_err = -1.0;
    for (std::size_t i = 0; i + 2 < s.size(); ++i) {
      const double w = (s[i + 1].alpha_x - s[i].alpha_x) / (s[i + 2].alpha_x - s[i].alpha_x);
      const double interp = s[i].alpha_z + w * (s[i + 2].alpha_z - s[i].alpha_z);
      const double e = std::abs(s[i + 1].alpha_z - interp);
      if (e > worst_err) {
        worst_err = e;
        worst = i;
      }
    }
    if (worst_err <= eps1) break;
    const double left_w = s[worst + 1].alpha_x - s[worst].alpha_x;
    const double right_w = s[worst + 2].alpha_x - s[worst + 1].alpha_x;
    if (left_w <= eps2 && right_w <= eps2) break;

    if (static_cast<int>(s.size()) >= max_samples) {
      throw ConvergenceError("adaptive sampler reached the cap of " + std::to_string(max_samples) + " samples");
    }
    const double left_d = std::abs(s[worst + 1].alpha_z - s[worst].alpha_z);
    const double right_d = std::abs(s[worst + 2].alpha_z - s[worst + 1].alpha_z);
    const std::size_t lo = right_d > left_d ? worst + 1 : worst;
    const CurveSample mid = f(0.5 * (s[lo].alpha_x + s[lo + 1].alpha_x));
    s.insert(s.begin() + static_cast<std::ptrdiff_t>(lo + 1), mid);
  }
  rep.P = trapezoid(s);
  rep.flag = *rep.P >= threshold;
  rep.monotone = rep.curve.monotone();
  return rep;
}

struct ThresholdRow {
  double threshold = 0.0;
  double accuracy_non_maneuver = 0.0;
  double accuracy_maneuver = 0.0;
  double accuracy_overall = 0.0;
};

/// Accuracy of "P >= threshold" per class; `maneuver[i]` is the true class.
inline std::vector<ThresholdRow> threshold_sweep(const std::vector<double>& P, const std::vector<bool>& maneuver,
                                                 const std::vector<double>& thresholds) {
  if (P.empty() || P.size() != maneuver.size()) throw ContractViolation("threshold_sweep: empty or mismatched campaign");
  std::vector<ThresholdRow> rows;
  for (double th : thresholds) {
    long n_man = 0, n_non = 0, ok_man = 0, ok_non = 0;
    for (std::size_t i = 0; i < P.size(); ++i) {
      const bool flag = P[i] >= th;
      if (maneuver[i]) {
        ++n_man;
        ok_man += flag;
      } else {
        ++n_non;
        ok_non += !flag;
      }
    }
    ThresholdRow r;
    r.threshold = th;
    r.accuracy_non_maneuver = n_non ? static_cast<double>(ok_non) / static_cast<double>(n_non) : NAN;
    r.accuracy_maneuver = n_man ? static_cast<double>(ok_man) / static_cast<double>(n_man) : NAN;
    r.accuracy_overall = static_cast<double>(ok_man + ok_non) / static_cast<double>(P.size());
    rows.push_back(r);
  }
  return rows;
}

}  // namespace cdmi::indicator

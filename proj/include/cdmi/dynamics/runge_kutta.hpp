#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "cdmi/errors.hpp"
#include "cdmi/polyalg/truncated_poly.hpp"

namespace cdmi::dynamics {

/// Explicit embedded Runge-Kutta pair. `b` propagates the solution;
/// `e` are the error-estimate weights (b minus the embedded weights).
/// When `e_aux` is non-empty the Hairer DOP853 combined estimate is used.
struct ButcherTableau {
  std::string name;
  int stages = 0;
  std::vector<double> c;
  std::vector<std::vector<double>> a;
  std::vector<double> b;
  std::vector<double> e;
  std::vector<double> e_aux;
  int error_order = 7;  // step-size exponent is 1 / (error_order + 1)
};

/// Fehlberg 7(8), 13 stages, propagating the 8th-order solution.
inline const ButcherTableau& rkf78() {
  static const ButcherTableau t = [] {
    ButcherTableau r;
    r.name = "rkf78";
    r.stages = 13;
    r.c = {0.0, 2.0 / 27, 1.0 / 9, 1.0 / 6, 5.0 / 12, 0.5, 5.0 / 6, 1.0 / 6, 2.0 / 3, 1.0 / 3, 1.0, 0.0, 1.0};
    r.a = {
        {},
        {2.0 / 27},
        {1.0 / 36, 1.0 / 12},
        {1.0 / 24, 0, 1.0 / 8},
        {5.0 / 12, 0, -25.0 / 16, 25.0 / 16},
        {1.0 / 20, 0, 0, 1.0 / 4, 1.0 / 5},
        {-25.0 / 108, 0, 0, 125.0 / 108, -65.0 / 27, 125.0 / 54},
        {31.0 / 300, 0, 0, 0, 61.0 / 225, -2.0 / 9, 13.0 / 900},
        {2.0, 0, 0, -53.0 / 6, 704.0 / 45, -107.0 / 9, 67.0 / 90, 3.0},
        {-91.0 / 108, 0, 0, 23.0 / 108, -976.0 / 135, 311.0 / 54, -19.0 / 60, 17.0 / 6, -1.0 / 12},
        {2383.0 / 4100, 0, 0, -341.0 / 164, 4496.0 / 1025, -301.0 / 82, 2133.0 / 4100, 45.0 / 82, 45.0 / 164,
         18.0 / 41},
        {3.0 / 205, 0, 0, 0, 0, -6.0 / 41, -3.0 / 205, -3.0 / 41, 3.0 / 41, 6.0 / 41, 0},
        {-1777.0 / 4100, 0, 0, -341.0 / 164, 4496.0 / 1025, -289.0 / 82, 2193.0 / 4100, 51.0 / 82, 33.0 / 164,
         12.0 / 41, 0, 1.0},
    };
    r.b = {0, 0, 0, 0, 0, 34.0 / 105, 9.0 / 35, 9.0 / 35, 9.0 / 280, 9.0 / 280, 0, 41.0 / 840, 41.0 / 840};
    const std::vector<double> b7 = {41.0 / 840, 0, 0, 0, 0, 34.0 / 105, 9.0 / 35, 9.0 / 35, 9.0 / 280, 9.0 / 280,
                                    41.0 / 840, 0, 0};
    r.e.resize(13);
    for (int i = 0; i < 13; ++i) r.e[static_cast<std::size_t>(i)] = r.b[static_cast<std::size_t>(i)] - b7[static_cast<std::size_t>(i)];
    r.error_order = 7;
    return r;
  }();
  return t;
}

/// Dormand-Prince 8(5,3), 12 stages (the DOP853 pair of Hairer & Wanner).
inline const ButcherTableau& dop853() {
  static const ButcherTableau t = [] {
    ButcherTableau r;
    r.name = "dop853";
    r.stages = 12;
    r.c = {0.0,
           0.526001519587677318785587544488e-01,
           0.789002279381515978178381316732e-01,
           0.118350341907227396726757197510,
           0.281649658092772603273242802490,
           0.333333333333333333333333333333,
           0.25,
           0.307692307692307692307692307692,
           0.651282051282051282051282051282,
           0.6,
           0.857142857142857142857142857142,
           1.0};
    r.a.assign(12, {});
    r.a[1] = {5.26001519587677318785587544488e-2};
    r.a[2] = {1.97250569845378994544595329183e-2, 5.91751709536136983633785987549e-2};
    r.a[3] = {2.95875854768068491816892993775e-2, 0, 8.87627564304205475450678981324e-2};
    r.a[4] = {2.41365134159266685502369798665e-1, 0, -8.84549479328286085344864962717e-1,
              9.24834003261792003115737966543e-1};
    r.a[5] = {3.7037037037037037037037037037e-2, 0, 0, 1.70828608729473871279604482173e-1,
              1.25467687566822425016691814123e-1};
    r.a[6] = {3.7109375e-2, 0, 0, 1.70252211019544039314978060272e-1, 6.02165389804559606850219397283e-2,
              -1.7578125e-2};
    r.a[7] = {3.70920001185047927108779319836e-2, 0, 0, 1.70383925712239993810214054705e-1,
              1.07262030446373284651809199168e-1, -1.53194377486244017527936158236e-2,
              8.27378916381402288758473766002e-3};
    r.a[8] = {6.24110958716075717114429577812e-1, 0, 0, -3.36089262944694129406857109825,
              -8.68219346841726006818189891453e-1, 2.75920996994467083049415600797e1,
              2.01540675504778934086186788979e1, -4.34898841810699588477366255144e1};
    r.a[9] = {4.77662536438264365890433908527e-1, 0, 0, -2.48811461997166764192642586468,
              -5.90290826836842996371446475743e-1, 2.12300514481811942347288949897e1,
              1.52792336328824235832596922938e1, -3.32882109689848629194453265587e1,
              -2.03312017085086261358222928593e-2};
    r.a[10] = {-9.3714243008598732571704021658e-1, 0, 0, 5.18637242884406370830023853209,
               1.09143734899672957818500254654, -8.14978701074692612513997267357,
               -1.85200656599969598641566180701e1, 2.27394870993505042818970056734e1,
               2.49360555267965238987089396762, -3.0467644718982195003823669022};
    r.a[11] = {2.27331014751653820792359768449, 0, 0, -1.05344954667372501984066689879e1,
               -2.00087205822486249909675718444, -1.79589318631187989172765950534e1,
               2.79488845294199600508499808837e1, -2.85899827713502369474065508674,
               -8.87285693353062954433549289258, 1.23605671757943030647266201528e1,
               6.43392746015763530355970484046e-1};
    r.b = {5.42937341165687622380535766363e-2, 0, 0, 0, 0, 4.45031289275240888144113950566,
           1.89151789931450038304281599044, -5.8012039600105847814672114227, 3.1116436695781989440891606237e-1,
           -1.52160949662516078556178806805e-1, 2.01365400804030348374776537501e-1,
           4.47106157277725905176885569043e-2};
    r.e = {0.1312004499419488073250102996e-1, 0, 0, 0, 0, -0.1225156446376204440720569753e+1,
           -0.4957589496572501915214079952, 0.1664377182454986536961530415e+1, -0.3503288487499736816886487290,
           0.3341791187130174790297318841, 0.8192320648511571246570742613e-1, -0.2235530786388629525884427845e-1};
    r.e_aux = r.b;
    r.e_aux[0] -= 0.244094488188976377952755905512;
    r.e_aux[8] -= 0.733846688281611857341361741547;
    r.e_aux[11] -= 0.220588235294117647058823529412e-1;
    r.error_order = 7;
    return r;
  }();
  return t;
}

inline const ButcherTableau& tableau_by_name(const std::string& name) {
  if (name == "rkf78") return rkf78();
  if (name == "dop853") return dop853();
  throw ConfigError("unknown Runge-Kutta coefficient set '" + name + "' (expected rkf78 or dop853)");
}

struct IntegratorOptions {
  double rel_tol = 1e-12;
  double abs_tol = 1e-12;
  double safety = 0.9;
  double min_factor = 0.2;
  double max_factor = 5.0;
  double min_step = 1e-14;
  double initial_step = 1e-3;
  long max_steps = 2'000'000;
  std::string rk_set = "rkf78";
};

struct IntegrationStats {
  long accepted = 0;
  long rejected = 0;
};

/// Adaptive integration from t0 to t1 (either direction) of y' = f(t, y) with
/// y an array of doubles or polynomials. Step-size control looks only at the
/// constant parts of the state, so polynomial runs follow the nominal error.
template <class Scalar, std::size_t N, class Rhs>
std::array<Scalar, N> integrate(const Rhs& f, std::array<Scalar, N> y, double t0, double t1,
                                const IntegratorOptions& opt, IntegrationStats* stats = nullptr) {
  if (!(opt.rel_tol > 0.0) || !(opt.abs_tol > 0.0)) throw ContractViolation("integrator tolerances must be positive");
  if (t1 == t0) return y;
  const ButcherTableau& tab = tableau_by_name(opt.rk_set);
  const double dir = t1 > t0 ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);
  const double exponent = -1.0 / (tab.error_order + 1.0);
  double h = std::min(opt.initial_step, span);
  double t = t0;
  const auto S = static_cast<std::size_t>(tab.stages);
  std::vector<std::array<Scalar, N>> k(S);
  long steps = 0;
  bool last = false;

  while (!last) {
    if (++steps > opt.max_steps) throw IntegrationError("integrator exceeded the maximum number of steps");
    const double remaining = std::abs(t1 - t);
    if (h >= remaining) {
      h = remaining;
      last = true;
    }
    const double hs = dir * h;

    k[0] = f(t, y);
    for (std::size_t s = 1; s < S; ++s) {
      std::array<Scalar, N> ys = y;
      const auto& row = tab.a[s];
      for (std::size_t j = 0; j < row.size(); ++j) {
        if (row[j] == 0.0) continue;
        for (std::size_t i = 0; i < N; ++i) ys[i] += (hs * row[j]) * k[j][i];
      }
      k[s] = f(t + tab.c[s] * hs, ys);
    }

    // error estimate on constant parts
    double err = 0.0;
    std::array<double, N> ynew_c{};
    for (std::size_t i = 0; i < N; ++i) {
      double inc = 0.0, e1 = 0.0, e2 = 0.0;
      for (std::size_t s = 0; s < S; ++s) {
        const double ks = polyalg::constant_part(k[s][i]);
        inc += tab.b[s] * ks;
        e1 += tab.e[s] * ks;
        if (!tab.e_aux.empty()) e2 += tab.e_aux[s] * ks;
      }
      const double y0 = polyalg::constant_part(y[i]);
      ynew_c[i] = y0 + hs * inc;
      double ei = std::abs(h * e1);
      if (!tab.e_aux.empty()) {
        const double denom = std::hypot(e1, 0.1 * e2);
        ei = denom > 0.0 ? std::abs(h * e1) * std::abs(e1) / denom : 0.0;
      }
      const double scale = opt.abs_tol + opt.rel_tol * std::max(std::abs(y0), std::abs(ynew_c[i]));
      err = std::max(err, ei / scale);
    }
    if (!std::isfinite(err)) throw IntegrationError("non-finite integrator error estimate");

    if (err <= 1.0) {
      for (std::size_t s = 0; s < S; ++s) {
        if (tab.b[s] == 0.0) continue;
        for (std::size_t i = 0; i < N; ++i) y[i] += (hs * tab.b[s]) * k[s][i];
      }
      t = last ? t1 : t + hs;
      if (stats) stats->accepted++;
      const double fac = err == 0.0 ? opt.max_factor : std::clamp(opt.safety * std::pow(err, exponent), opt.min_factor, opt.max_factor);
      h *= fac;
    } else {
      if (stats) stats->rejected++;
      last = false;
      h *= std::clamp(opt.safety * std::pow(err, exponent), opt.min_factor, 1.0);
    }
    if (!last && h < opt.min_step) {
      throw IntegrationError("step size underflow near t = " + std::to_string(t) +
                             " (stiffness or near-singularity)");
    }
  }
  return y;
}

}  // namespace cdmi::dynamics

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "attenua/errors.hpp"
#include "attenua/observables.hpp"

namespace attenua {

struct EnergySeries {
  std::string scenario_id;
  std::vector<EnergyRecord> records;
  DataNorms norms;

  std::vector<double> times() const {
    std::vector<double> t;
    t.reserve(records.size());
    for (const auto& r : records) t.push_back(r.t);
    return t;
  }
  template <class Member>
  std::vector<double> column(Member m) const {
    std::vector<double> c;
    c.reserve(records.size());
    for (const auto& r : records) c.push_back(r.*m);
    return c;
  }
};

// Strictly increasing t, E >= 0 and E non-increasing up to tol_per_step * E(0)
// between consecutive records.
inline void validate_series(const EnergySeries& s, double tol_per_step = 1e-10) {
  const auto& r = s.records;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i].E < 0.0) throw Error(ErrorKind::Precondition, "negative energy in series " + s.scenario_id);
    if (i == 0) continue;
    if (!(r[i].t > r[i - 1].t)) throw Error(ErrorKind::Precondition, "series times are not increasing");
    if (r[i].E > r[i - 1].E + tol_per_step * r.front().E)
      throw Error(ErrorKind::Precondition,
                  "energy increases at t=" + std::to_string(r[i].t) + " in series " + s.scenario_id);
  }
}

struct PowerFit {
  double exponent = 0.0;
  double stderr_ = 0.0;
  std::size_t samples = 0;
};

// Least-squares slope of log q against log(1 + t) over samples with
// t_lo <= t <= t_hi.
inline PowerFit fit_power_exponent(std::span<const double> t, std::span<const double> q, double t_lo,
                                   double t_hi) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_lo || t[i] > t_hi) continue;
    if (!(q[i] > 0.0))
      throw Error(ErrorKind::NonPositiveValues, "non-positive value at t=" + std::to_string(t[i]));
    xs.push_back(std::log1p(t[i]));
    ys.push_back(std::log(q[i]));
  }
  const std::size_t m = xs.size();
  if (m < 20) throw Error(ErrorKind::Precondition, "power fit needs at least 20 samples in the window");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  PowerFit fit;
  fit.samples = m;
  fit.exponent = sxy / sxx;
  double sse = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double e = ys[i] - (my + fit.exponent * (xs[i] - mx));
    sse += e * e;
  }
  fit.stderr_ = std::sqrt(sse / static_cast<double>(m - 2) / sxx);
  return fit;
}

struct RateVerdict {
  std::string quantity;
  double fitted_exponent = 0.0;
  double fit_stderr = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  double empirical_C = 0.0;        // sup over the window of (1+t)^p q / I
  double empirical_C_late = 0.0;   // same sup over the last quarter of the window
  double empirical_C_early = 0.0;  // same sup over the first three quarters
  double claimed_p = 0.0;
  double slack = 0.0;
  bool no_growth = false;
  bool rate_ok = false;
  bool pass = false;
};

// Desk-scale stand-in for "q(t) <= C (1+t)^{-p} I": the weighted quantity
// (1+t)^p q / I must not grow into the end of the window (late sup within
// 1.1x of the earlier sup) and the fitted log-log slope of q must not exceed
// -p + slack.
inline RateVerdict boundedness_certificate(std::string quantity, std::span<const double> t,
                                           std::span<const double> q, double p, double I, double t_lo,
                                           double t_hi, double slack = 0.4) {
  if (!(I > 0.0)) throw Error(ErrorKind::Precondition, "normalizer must be positive");
  RateVerdict v;
  v.quantity = std::move(quantity);
  v.claimed_p = p;
  v.slack = slack;
  v.t_lo = t_lo;
  v.t_hi = t_hi;
  const double t_split = t_lo + 0.75 * (t_hi - t_lo);
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_lo || t[i] > t_hi) continue;
    const double c = std::pow(1.0 + t[i], p) * q[i] / I;
    v.empirical_C = std::max(v.empirical_C, c);
    if (t[i] >= t_split)
      v.empirical_C_late = std::max(v.empirical_C_late, c);
    else
      v.empirical_C_early = std::max(v.empirical_C_early, c);
  }
  const auto fit = fit_power_exponent(t, q, t_lo, t_hi);
  v.fitted_exponent = fit.exponent;
  v.fit_stderr = fit.stderr_;
  v.no_growth = v.empirical_C_late <= 1.1 * v.empirical_C_early;
  v.rate_ok = v.fitted_exponent <= -p + slack;
  v.pass = v.no_growth && v.rate_ok;
  return v;
}

// One verdict per cascade depth n (runs[n] started from A^n of the base data):
// claimed exponent n + 1 against I_{0,n}, or n + 2 against I_{1,n} when
// weighted.
inline std::vector<RateVerdict> cascade_verdicts(std::span<const EnergySeries> runs, bool weighted, double t_lo,
                                                 double t_hi, double slack = 0.4) {
  std::vector<RateVerdict> out;
  for (std::size_t n = 0; n < runs.size(); ++n) {
    const auto& s = runs[n];
    validate_series(s);
    double I = s.norms.I0n;
    if (weighted) {
      if (!s.norms.I1n) throw Error(ErrorKind::Precondition, "weighted cascade needs I_{1,n}");
      I = *s.norms.I1n;
    }
    const double p = static_cast<double>(n) + (weighted ? 2.0 : 1.0);
    const auto t = s.times();
    const auto e = s.column(&EnergyRecord::E);
    out.push_back(boundedness_certificate("E_cascade(" + std::to_string(n) + ")", t, e, p, I, t_lo, t_hi, slack));
  }
  return out;
}

}  // namespace attenua

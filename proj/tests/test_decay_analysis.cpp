#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "attenua/decay_analysis.hpp"

using namespace attenua;

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) t[i] = a + (b - a) * i / (n - 1);
  return t;
}

std::vector<double> power_law(const std::vector<double>& t, double c, double p) {
  std::vector<double> q;
  for (double x : t) q.push_back(c * std::pow(1.0 + x, -p));
  return q;
}

EnergySeries series_from(const std::vector<double>& t, const std::vector<double>& E, double I0n, double I1n) {
  EnergySeries s;
  s.scenario_id = "synthetic";
  for (std::size_t i = 0; i < t.size(); ++i) {
    EnergyRecord r;
    r.t = t[i];
    r.E = E[i];
    s.records.push_back(r);
  }
  s.norms.I0 = I0n * 1.5;
  s.norms.I0n = I0n;
  s.norms.I1 = I1n * 1.5;
  s.norms.I1n = I1n;
  return s;
}

}  // namespace

TEST(FitPowerExponent, ExactLaws) {
  const auto t = linspace(0.0, 50.0, 101);
  auto f = fit_power_exponent(t, power_law(t, 1.0, 1.0), 5.0, 50.0);
  EXPECT_NEAR(f.exponent, -1.0, 1e-9);
  EXPECT_LT(f.stderr_, 1e-9);
  f = fit_power_exponent(t, power_law(t, 5.0, 2.0), 5.0, 50.0);
  EXPECT_NEAR(f.exponent, -2.0, 1e-9);
}

TEST(FitPowerExponent, NoisySyntheticSeries) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> noise(0.0, 0.05);
  const auto t = linspace(1.0, 100.0, 200);
  auto q = power_law(t, 3.0, 1.5);
  for (auto& v : q) v *= 1.0 + noise(rng);
  const auto f = fit_power_exponent(t, q, 1.0, 100.0);
  EXPECT_NEAR(f.exponent, -1.5, 0.1);
  EXPECT_EQ(f.samples, 200u);
}

TEST(FitPowerExponent, ScaleInvariant) {
  const auto t = linspace(0.0, 30.0, 60);
  auto q = power_law(t, 1.0, 0.7);
  for (std::size_t i = 0; i < q.size(); ++i) q[i] *= 1.0 + 0.1 * std::sin(static_cast<double>(i));
  const double e1 = fit_power_exponent(t, q, 2.0, 30.0).exponent;
  for (auto& v : q) v *= 123.0;
  EXPECT_NEAR(fit_power_exponent(t, q, 2.0, 30.0).exponent, e1, 1e-12);
}

TEST(FitPowerExponent, Errors) {
  const auto t = linspace(0.0, 10.0, 15);
  EXPECT_THROW(fit_power_exponent(t, power_law(t, 1.0, 1.0), 0.0, 10.0), Error);
  const auto t2 = linspace(0.0, 10.0, 40);
  auto q = power_law(t2, 1.0, 1.0);
  q[20] = 0.0;
  try {
    fit_power_exponent(t2, q, 0.0, 10.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonPositiveValues);
  }
}

TEST(Boundedness, ExactDecayPasses) {
  const auto t = linspace(0.0, 40.0, 81);
  const auto v = boundedness_certificate("E", t, power_law(t, 1.0, 1.0), 1.0, 1.0, 5.0, 40.0);
  EXPECT_NEAR(v.empirical_C, 1.0, 1e-12);
  EXPECT_TRUE(v.no_growth);
  EXPECT_TRUE(v.rate_ok);
  EXPECT_TRUE(v.pass);
}

TEST(Boundedness, ConstantFailsRateOne) {
  const auto t = linspace(0.0, 40.0, 81);
  const std::vector<double> q(t.size(), 0.3);
  const auto v = boundedness_certificate("E", t, q, 1.0, 1.0, 5.0, 40.0);
  EXPECT_FALSE(v.no_growth);
  EXPECT_FALSE(v.rate_ok);
  EXPECT_FALSE(v.pass);
  EXPECT_NEAR(v.empirical_C, 41.0 * 0.3, 1e-12);
}

TEST(Boundedness, NormalizerMustBePositive) {
  const auto t = linspace(0.0, 40.0, 81);
  EXPECT_THROW(boundedness_certificate("E", t, power_law(t, 1.0, 1.0), 1.0, 0.0, 5.0, 40.0), Error);
}

TEST(Boundedness, PassAtPImpliesPassAtSmallerP) {
  const auto t = linspace(0.0, 60.0, 121);
  for (double p_true : {1.2, 2.0, 3.5}) {
    auto q = power_law(t, 2.0, p_true);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] *= 1.0 + 0.2 * std::sin(0.7 * static_cast<double>(i));
    for (double p = 0.0; p <= 4.0; p += 0.25) {
      if (!boundedness_certificate("q", t, q, p, 1.0, 6.0, 48.0).pass) continue;
      for (double pp = 0.0; pp < p; pp += 0.25)
        EXPECT_TRUE(boundedness_certificate("q", t, q, pp, 1.0, 6.0, 48.0).pass) << p_true << " " << p << " " << pp;
    }
  }
}

TEST(ValidateSeries, Monotonicity) {
  const auto t = linspace(0.0, 10.0, 30);
  EXPECT_NO_THROW(validate_series(series_from(t, power_law(t, 1.0, 1.0), 1.0, 1.0)));
  auto E = power_law(t, 1.0, 1.0);
  E[10] = E[9] * 1.01;
  EXPECT_THROW(validate_series(series_from(t, E, 1.0, 1.0)), Error);
  auto t2 = t;
  t2[5] = t2[4];
  EXPECT_THROW(validate_series(series_from(t2, power_law(t, 1.0, 1.0), 1.0, 1.0)), Error);
}

TEST(CascadeVerdicts, ClaimedExponentsAndNormalizers) {
  const auto t = linspace(0.0, 60.0, 121);
  std::vector<EnergySeries> runs{series_from(t, power_law(t, 1.0, 2.2), 2.0, 3.0),
                                 series_from(t, power_law(t, 1.0, 3.4), 4.0, 5.0),
                                 series_from(t, power_law(t, 1.0, 3.0), 6.0, 7.0)};
  const auto un = cascade_verdicts(runs, false, 6.0, 48.0);
  const auto w = cascade_verdicts(runs, true, 6.0, 48.0);
  ASSERT_EQ(un.size(), 3u);
  for (std::size_t n = 0; n < 3; ++n) {
    EXPECT_EQ(un[n].claimed_p, n + 1.0);
    EXPECT_EQ(w[n].claimed_p, n + 2.0);
    const auto t_ = runs[n].times();
    const auto e = runs[n].column(&EnergyRecord::E);
    const auto ref_u = boundedness_certificate("x", t_, e, n + 1.0, runs[n].norms.I0n, 6.0, 48.0);
    const auto ref_w = boundedness_certificate("x", t_, e, n + 2.0, *runs[n].norms.I1n, 6.0, 48.0);
    EXPECT_EQ(un[n].empirical_C, ref_u.empirical_C);
    EXPECT_EQ(un[n].pass, ref_u.pass);
    EXPECT_EQ(w[n].empirical_C, ref_w.empirical_C);
    EXPECT_EQ(w[n].pass, ref_w.pass);
  }
  // n = 0 is the plain energy certificate with exponent 1 (unweighted) or 2 (weighted)
  const auto e0 = runs[0].column(&EnergyRecord::E);
  EXPECT_EQ(un[0].fitted_exponent, boundedness_certificate("E", t, e0, 1.0, runs[0].norms.I0, 6.0, 48.0).fitted_exponent);
  EXPECT_TRUE(w[0].pass);
  EXPECT_FALSE(w[2].rate_ok);  // decays like (1+t)^-3 against a claimed -4 with slack 0.4
  EXPECT_TRUE(un[2].rate_ok);
}

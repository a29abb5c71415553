#include <gtest/gtest.h>

#include <cmath>

#include "attenua/damping.hpp"

using namespace attenua;

TEST(EvalDamping, Examples) {
  EXPECT_DOUBLE_EQ(eval_damping(DampingProfile::constant(1.0), {7, -3}), 1.0);
  const auto p = DampingProfile::radial_plateau(3.0, 1.0, 2.0);
  EXPECT_DOUBLE_EQ(eval_damping(p, {0, 0}), 0.0);
  EXPECT_DOUBLE_EQ(eval_damping(p, {3, 0}), 2.0);
  EXPECT_DOUBLE_EQ(eval_damping(p, {0, -3}), 2.0);
  EXPECT_DOUBLE_EQ(eval_damping(p, {2, 0}), 0.0);
  EXPECT_DOUBLE_EQ(eval_damping(p, {2.5, 0}), 1.0);  // smoothstep midpoint
}

TEST(EvalDamping, PlateauIsRadiallyNondecreasingAndC1) {
  const auto p = DampingProfile::radial_plateau(3.0, 1.0, 2.0);
  double prev = -1.0;
  for (int k = 0; k <= 6000; ++k) {
    const double r = k * 1e-3;
    const double a = eval_damping(p, {r * 0.6, r * 0.8});
    EXPECT_GE(a, prev);
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, 2.0);
    prev = a;
  }
  // one-sided difference quotients at both ends of the ramp vanish
  const double e = 1e-6;
  EXPECT_NEAR((eval_damping(p, {2.0 + e, 0}) - eval_damping(p, {2.0, 0})) / e, 0.0, 1e-4);
  EXPECT_NEAR((eval_damping(p, {3.0, 0}) - eval_damping(p, {3.0 - e, 0})) / e, 0.0, 1e-4);
}

TEST(VerifyHypA, PlateauHolds) {
  const auto p = DampingProfile::radial_plateau(3.0, 1.0, 2.0, 0.5);
  for (auto [h, R] : {std::pair{0.25, 8.5}, std::pair{0.1, 8.0}, std::pair{1.0 / 30.0, 8.5}}) {
    const Grid g(h, R);
    const auto m = build_mask(Obstacle{{Disk{{0, 0}, 1.0}}}, g);
    EXPECT_TRUE(verify_hyp_a(p, g, m).holds) << h;
  }
}

TEST(VerifyHypA, AnnulusFailsOutsideSupport) {
  const auto p = DampingProfile::annulus(2.0, 5.0, 2.0, 3.0, 0.5);
  const Grid g(0.1, 8.0);
  const auto m = build_mask(Obstacle{}, g);
  const auto r = verify_hyp_a(p, g, m);
  ASSERT_FALSE(r.holds);
  ASSERT_TRUE(r.violating_point);
  EXPECT_GT(norm(*r.violating_point), 5.0);
  EXPECT_LE(eval_damping(p, *r.violating_point), 0.5);
  EXPECT_TRUE(m.is_fluid(*r.violating_node));
}

TEST(VerifyHypA, StrictInequalityOnTable) {
  const Grid g(0.25, 4.0);
  const auto m = build_mask(Obstacle{}, g);
  Field table(g.size(), 1.0);
  const std::size_t far = g.flat(3, 20);
  table[far] = 0.5;
  const auto p = DampingProfile::from_table(g, table, 2.0, 0.5);
  const auto r = verify_hyp_a(p, g, m);
  EXPECT_FALSE(r.holds);
  EXPECT_EQ(r.violating_node, far);
  table[far] = 0.5 + 1e-12;
  EXPECT_TRUE(verify_hyp_a(DampingProfile::from_table(g, table, 2.0, 0.5), g, m).holds);
}

TEST(OmegaMask, ConstantAndZero) {
  const Grid g(0.1, 2.0);
  const auto m = build_mask(Obstacle{{Disk{{0, 0}, 0.5}}}, g);
  const auto all = omega_mask(DampingProfile::constant(1.0, 0.5), g, m);
  const auto none = omega_mask(DampingProfile::constant(0.0, 0.5), g, m);
  for (std::size_t p = 0; p < g.size(); ++p) {
    EXPECT_EQ(all[p], m.is_fluid(p));
    EXPECT_FALSE(none[p]);
  }
}

TEST(OmegaMask, ThresholdRadiusMatchesBisection) {
  const auto p = DampingProfile::radial_plateau(3.0, 1.0, 2.0);  // eps0 = 1
  double lo = 2.0, hi = 3.0;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (eval_damping(p, {mid, 0}) > p.eps0 ? hi : lo) = mid;
  }
  const double r_star = hi;
  EXPECT_NEAR(r_star, 2.5, 1e-12);
  const Grid g(0.05, 4.0);
  const auto m = build_mask(Obstacle{{Disk{{0, 0}, 1.0}}}, g);
  const auto om = omega_mask(p, g, m);
  for (std::size_t q : m.fluid_nodes()) {
    const double r = norm(g.position(q));
    if (std::abs(r - r_star) < 1e-9) continue;
    EXPECT_EQ(om[q], r > r_star) << r;
  }
}

TEST(OmegaMask, AntitoneInEps0) {
  const Grid g(0.1, 5.0);
  const auto m = build_mask(Obstacle{{Disk{{0.5, 0}, 1.0}}}, g);
  auto p = DampingProfile::radial_plateau(3.0, 1.5, 2.0, 0.4);
  const auto wide = omega_mask(p, g, m);
  p.eps0 = 1.6;
  const auto narrow = omega_mask(p, g, m);
  for (std::size_t q = 0; q < g.size(); ++q)
    if (narrow[q]) {
      EXPECT_TRUE(wide[q]);
    }
}

TEST(DampingField, MatchesPointwiseEvaluation) {
  const Grid g(0.1, 5.0);
  const auto p = DampingProfile::annulus(1.0, 3.0, 1.5, 3.0);
  const auto a = damping_field(p, g);
  for (std::size_t q = 0; q < g.size(); q += 37) EXPECT_DOUBLE_EQ(a[q], eval_damping(p, g.position(q)));
}

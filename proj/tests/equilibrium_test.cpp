#include "spotmarket/equilibrium.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>

#include "spotmarket/numeric_checks.hpp"

namespace spotmarket {
namespace {

// Expected values below come from solving the first-order conditions and
// integrating the utility integrands symbolically (exact rationals), not
// from the closed forms under test.
struct Frozen {
  double qo, qs, go, gs;
  double p_o, p_s, b_ns, b_so, rev_o, rev_s, rev, agg_o, agg_s;
};

constexpr Frozen kFrozen[] = {
    {100, 30, 0.2, 0.5, 55.335968379446640316, 11.620553359683794466,
     0.38735177865612648221, 0.62450592885375494071, 4.1556656095236607352,
     1.3779312284210032964, 5.5335968379446640316, 1.9442578387414269868,
     0.42181568216969488666},
    {100, 10, 0.2, 0.3, 50.232558139534883721, 4.1860465116279069767,
     0.41860465116279069767, 0.51162790697674418605, 4.9064359113034072472,
     0.11681990265008112493, 5.0232558139534883721, 2.4759329367225527312,
     0.012979989183342347215},
    {100, 50, 0.2, 0.3, 52.173913043478260870, 21.739130434782608696,
     0.43478260869565217391, 0.60869565217391304348, 4.0831758034026465028,
     1.1342155009451795841, 5.2173913043478260870, 2.2117202268431001890,
     0.22684310018903591682},
};

class FrozenEquilibriumTest : public ::testing::TestWithParam<Frozen> {};

TEST_P(FrozenEquilibriumTest, MatchesSymbolicSolution) {
  const Frozen& f = GetParam();
  const MarketParams params(f.qo, f.qs, f.go, f.gs);
  ASSERT_TRUE(check_c1(params));
  const EquilibriumOutcome eq = equilibrium(params);
  const auto near = [](double got, double want) {
    EXPECT_NEAR(got, want, 1e-12 * std::max(1.0, std::abs(want)));
  };
  near(eq.prices.on_demand, f.p_o);
  near(eq.prices.spot, f.p_s);
  near(eq.shares.spot.lower, f.b_ns);
  near(eq.shares.on_demand.lower, f.b_so);
  near(eq.shares.on_demand.length(), 1.0 - f.b_so);
  near(eq.shares.spot.length(), f.b_so - f.b_ns);
  near(eq.revenue.on_demand, f.rev_o);
  near(eq.revenue.spot, f.rev_s);
  near(eq.revenue.total, f.rev);
  near(eq.utilities.on_demand, f.agg_o);
  near(eq.utilities.spot, f.agg_s);
  EXPECT_NEAR(eq.revenue.total, eq.revenue.on_demand + eq.revenue.spot, 1e-12);

  const ShareBoundaries b = equilibrium_share_boundaries(params);
  near(b.none_spot, f.b_ns);
  near(b.spot_on_demand, f.b_so);
  near(b.none_spot, eq.prices.spot / f.qs);
  near(b.spot_on_demand, (eq.prices.on_demand - eq.prices.spot) / (f.qo - f.qs));
}

INSTANTIATE_TEST_SUITE_P(Reference, FrozenEquilibriumTest,
                         ::testing::ValuesIn(kFrozen));

TEST(CheckC1Test, Examples) {
  EXPECT_TRUE(check_c1(MarketParams(100, 30, 0.2, 0.5)));
  EXPECT_FALSE(check_c1(MarketParams(100, 30, 0.3, 0.3)));
  EXPECT_FALSE(check_c1(MarketParams(5, 1, 0.3, 0.3)));
  EXPECT_TRUE(check_c1(MarketParams(100, 50, 0.2, 0.3)));
}

TEST(CheckC1Test, DiagnosesWhichBoundFailed) {
  const ViabilityReport upper = diagnose_c1(MarketParams(100, 30, 0.3, 0.3));
  EXPECT_TRUE(upper.lower_ok);
  EXPECT_FALSE(upper.upper_ok);
  EXPECT_NE(upper.failure().find("upper bound"), std::string::npos);

  const ViabilityReport lower = diagnose_c1(MarketParams(100, 99.9, 0.2, 0.5));
  EXPECT_NEAR(lower.lower_bound, 0.7 * 99.9 / 200.0, 1e-15);
  EXPECT_FALSE(lower.lower_ok);
  EXPECT_NE(lower.failure().find("lower bound"), std::string::npos);
}

TEST(EquilibriumTest, ThrowsWithoutUniqueEquilibrium) {
  EXPECT_THROW(equilibrium(MarketParams(100, 30, 0.3, 0.3)), NoUniqueEquilibrium);
  EXPECT_THROW(equilibrium_share_boundaries(MarketParams(100, 30, 0.3, 0.3)),
               NoUniqueEquilibrium);
  EXPECT_THROW(compare_markets(MarketParams(100, 99.9, 0.2, 0.5)),
               NoUniqueEquilibrium);
  EXPECT_THROW(aggregate_utilities(MarketParams(100, 99.9, 0.2, 0.5)),
               NoUniqueEquilibrium);
  try {
    equilibrium(MarketParams(100, 30, 0.3, 0.3));
  } catch (const NoUniqueEquilibrium& e) {
    EXPECT_NE(std::string(e.what()).find("upper bound"), std::string::npos);
  }
}

TEST(EquilibriumTest, SpotShareVanishesAsUtilizationsMeet) {
  const MarketParams params(100, 30, 0.2, 0.2001);
  const ShareBoundaries b = equilibrium_share_boundaries(params);
  EXPECT_NEAR(b.spot_on_demand - b.none_spot, 0.00017848219225607354152, 1e-15);
  // Cancellation near the degenerate point costs a few digits.
  EXPECT_NEAR(aggregate_utilities(params).spot, 9.5615462697030795213e-8, 1e-19);
}

TEST(BaselineTest, ClosedForm) {
  const BaselineOutcome a = on_demand_only_equilibrium(MarketParams(100, 30, 0.2, 0.5));
  EXPECT_EQ(a.price, 50.0);
  EXPECT_EQ(a.share_length, 0.5);
  EXPECT_EQ(a.revenue, 5.0);
  const BaselineOutcome b = on_demand_only_equilibrium(MarketParams(1, 0.5, 1, 1));
  EXPECT_EQ(b.price, 0.5);
  EXPECT_EQ(b.share_length, 0.5);
  EXPECT_EQ(b.revenue, 0.25);
  EXPECT_DOUBLE_EQ(on_demand_only_aggregate_utility(MarketParams(100, 30, 0.2, 0.5)),
                   2.5);
}

TEST(BaselineTest, PriceGridAgrees) {
  // γ_o p (1 − p/q_o) maximized over a 1e-4 lattice.
  const double qo = 100.0;
  const double go = 0.2;
  double best_p = 0.0;
  double best = -1.0;
  for (int k = 0; k <= 1'000'000; ++k) {
    const double p = k * 1e-4;
    const double v = go * p * (1.0 - p / qo);
    if (v > best) {
      best = v;
      best_p = p;
    }
  }
  EXPECT_NEAR(best_p, on_demand_only_equilibrium(MarketParams(qo, 30, go, 0.5)).price,
              1e-3);
}

TEST(CompareMarketsTest, ReferencePoints) {
  for (const MarketParams& params :
       {MarketParams(100, 30, 0.2, 0.5), MarketParams(100, 50, 0.2, 0.3)}) {
    const ComparisonReport r = compare_markets(params);
    EXPECT_TRUE(r.all_hold());
    EXPECT_EQ(r.revenue.on_demand_only, 5.0);
  }
  EXPECT_NEAR(compare_markets(MarketParams(100, 30, 0.2, 0.5)).revenue.with_spot,
              5.534, 1e-3);
}

TEST(HessianTest, Examples) {
  const MarketParams params(100, 30, 0.2, 0.5);
  const HessianReport h = hessian_check(params, equilibrium(params).prices);
  EXPECT_NEAR(h.determinant_term, 25.3, 1e-12);
  EXPECT_TRUE(h.negative_definite);
  EXPECT_TRUE(h.finite_difference_agrees);
  EXPECT_LT(h.trace, 0.0);
  EXPECT_DOUBLE_EQ(h.trace, -2 * 0.2 / 70 - 2 * 0.5 / 70 - 2 * 0.5 / 30);

  // The Hessian does not depend on prices inside the region with both
  // shares non-empty.
  const HessianReport off = hessian_check(params, {60.0, 12.0});
  EXPECT_TRUE(off.finite_difference_agrees);
  EXPECT_TRUE(off.negative_definite);

  const HessianReport bad = hessian_check(MarketParams(100, 90, 0.05, 0.3), {50, 40});
  EXPECT_NEAR(bad.determinant_term, 6.0 - 11.025, 1e-12);
  EXPECT_FALSE(bad.negative_definite);
}

TEST(DenominatorTest, DegenerateDenominatorIsRejected) {
  // C1 strict inequalities hold but both are within ~1e-10 of equality, so
  // D is ~2e-10 of γ_o γ_s q_o.
  const double go = 0.2;
  const double gs = 0.2 * (1 + 1e-10);
  const double qo = 100.0;
  const double qs = 2 * go * qo / (go + gs) * (1 - 1e-11);
  const MarketParams params(qo, qs, go, gs);
  EXPECT_TRUE(check_c1(params));
  EXPECT_FALSE(has_unique_equilibrium(params));
  EXPECT_THROW(equilibrium(params), NoUniqueEquilibrium);
}

TEST(EquilibriumPropertyTest, ScaleCovariance) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const MarketParams p = sample_viable_params(rng);
    const double k = 3.5;
    const MarketParams scaled(k * p.qos_on_demand(), k * p.qos_spot(),
                              p.util_on_demand(), p.util_spot());
    const EquilibriumOutcome a = equilibrium(p);
    const EquilibriumOutcome b = equilibrium(scaled);
    EXPECT_NEAR(b.prices.on_demand, k * a.prices.on_demand, 1e-10 * b.prices.on_demand);
    EXPECT_NEAR(b.prices.spot, k * a.prices.spot, 1e-10 * b.prices.spot);
    EXPECT_NEAR(b.revenue.total, k * a.revenue.total, 1e-10 * b.revenue.total);
    EXPECT_NEAR(b.shares.on_demand.length(), a.shares.on_demand.length(), 1e-12);
    EXPECT_NEAR(b.shares.spot.length(), a.shares.spot.length(), 1e-12);
  }
}

TEST(EquilibriumPropertyTest, OutcomeInvariantsOnRandomDraws) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 1000; ++i) {
    const MarketParams p = sample_viable_params(rng);
    ASSERT_TRUE(check_c1(p));
    const EquilibriumOutcome eq = equilibrium(p);
    EXPECT_GT(equilibrium_denominator(p), 0.0);
    EXPECT_TRUE(check_c0(p, eq.prices));
    EXPECT_GE(eq.revenue.on_demand, 0.0);
    EXPECT_GE(eq.revenue.spot, 0.0);
    EXPECT_GE(eq.utilities.on_demand, 0.0);
    EXPECT_GE(eq.utilities.spot, 0.0);
    EXPECT_NEAR(eq.revenue.total, eq.revenue.on_demand + eq.revenue.spot,
                1e-12 * std::max(1.0, eq.revenue.total));
    const ShareBoundaries b = equilibrium_share_boundaries(p);
    EXPECT_GT(b.none_spot, 0.0);
    EXPECT_LT(b.none_spot, b.spot_on_demand);
    EXPECT_LT(b.spot_on_demand, 1.0);
    EXPECT_TRUE(compare_markets(p).all_hold()) << p.qos_on_demand();
    EXPECT_TRUE(hessian_check(p, eq.prices).negative_definite);
  }
}

}  // namespace
}  // namespace spotmarket

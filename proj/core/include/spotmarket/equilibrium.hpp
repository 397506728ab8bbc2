#ifndef SPOTMARKET_EQUILIBRIUM_HPP_
#define SPOTMARKET_EQUILIBRIUM_HPP_

#include <stdexcept>
#include <string>

#include "spotmarket/market_model.hpp"

namespace spotmarket {

// Raised when the pricing game has no unique interior equilibrium. The
// message names the bound of the viability condition that failed.
class NoUniqueEquilibrium : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Outcome of the viability test on (q_o, q_s, γ_o, γ_s):
//   η q_s / (2 q_o) < γ_o < η / 2,  with η = γ_o + γ_s.
struct ViabilityReport {
  double lower_bound = 0.0;  // η q_s / (2 q_o)
  double upper_bound = 0.0;  // η / 2
  double util_on_demand = 0.0;
  bool lower_ok = false;
  bool upper_ok = false;

  bool holds() const { return lower_ok && upper_ok; }
  // Human-readable description of the first failed bound; empty when holds().
  std::string failure() const;
};

ViabilityReport diagnose_c1(const MarketParams& params);
bool check_c1(const MarketParams& params);

// 4 γ_o γ_s q_o − η² q_s; the common denominator of every equilibrium
// quantity and, up to a positive factor, the determinant of the revenue
// Hessian.
double equilibrium_denominator(const MarketParams& params);

// True when check_c1 holds and the denominator is numerically safe to divide
// by (see equilibrium()).
bool has_unique_equilibrium(const MarketParams& params);

struct AggregateUtilities {
  double on_demand = 0.0;
  double spot = 0.0;

  double total() const { return on_demand + spot; }
};

struct EquilibriumOutcome {
  PriceVector prices;
  MarketShares shares;
  Revenue revenue;
  AggregateUtilities utilities;
};

// Boundaries of the spot interval at equilibrium.
struct ShareBoundaries {
  double none_spot = 0.0;
  double spot_on_demand = 0.0;
};

struct BaselineOutcome {
  double price = 0.0;
  double share_length = 0.0;
  double revenue = 0.0;
};

struct ComparedValues {
  double with_spot = 0.0;
  double on_demand_only = 0.0;
  bool holds = false;
};

// Equilibrium of the two-service market against the on-demand-only market.
struct ComparisonReport {
  ComparedValues price;            // with_spot > on_demand_only
  ComparedValues on_demand_share;  // with_spot < on_demand_only
  ComparedValues served_share;     // with_spot > on_demand_only
  ComparedValues revenue;          // with_spot > on_demand_only

  bool all_hold() const {
    return price.holds && on_demand_share.holds && served_share.holds &&
           revenue.holds;
  }
};

struct HessianReport {
  double d2_on_demand = 0.0;  // ∂²π/∂p_o²
  double d2_spot = 0.0;       // ∂²π/∂p_s²
  double d2_cross = 0.0;      // ∂²π/∂p_o∂p_s
  double trace = 0.0;
  double determinant_term = 0.0;
  bool negative_definite = false;

  // Central second differences of revenue() at the probed prices.
  double fd_on_demand = 0.0;
  double fd_spot = 0.0;
  double fd_cross = 0.0;
  // Analytic and finite-difference entries agree within 1e-4 relative. Only
  // expected where both shares are nonempty; elsewhere revenue() follows a
  // different branch.
  bool finite_difference_agrees = false;
};

// Closed-form Stage-I equilibrium. Throws NoUniqueEquilibrium when the
// viability condition fails or the denominator is below
// 1e-9 · γ_o γ_s q_o.
EquilibriumOutcome equilibrium(const MarketParams& params);

ShareBoundaries equilibrium_share_boundaries(const MarketParams& params);

BaselineOutcome on_demand_only_equilibrium(const MarketParams& params);

// Aggregate surplus of on-demand customers when only on-demand is offered:
// ∫_{1/2}^{1} (θ q_o − q_o/2) γ_o dθ = γ_o q_o / 8.
double on_demand_only_aggregate_utility(const MarketParams& params);

ComparisonReport compare_markets(const MarketParams& params);

AggregateUtilities aggregate_utilities(const MarketParams& params);

HessianReport hessian_check(const MarketParams& params,
                            const PriceVector& prices);

}  // namespace spotmarket

#endif  // SPOTMARKET_EQUILIBRIUM_HPP_

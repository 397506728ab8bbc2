#ifndef SPOTMARKET_NUMERIC_CHECKS_HPP_
#define SPOTMARKET_NUMERIC_CHECKS_HPP_

#include <cstddef>
#include <random>

#include "spotmarket/equilibrium.hpp"
#include "spotmarket/market_model.hpp"

// Numeric counterparts of the closed forms in equilibrium.hpp. None of these
// call into the closed-form equilibrium; they only use the Stage-II model
// (best_response, market_shares, revenue).
namespace spotmarket {

// Maximizer of revenue() over the lattice {k · grid_step} inside
// [0, q_o] × [0, q_s]. Ties go to the point seen first in (p_o, p_s)
// lexicographic order. Lattices with more than ~10^6 points are searched
// coarse-to-fine: an exhaustive pass at a power-of-ten multiple of the step,
// then exhaustive windows of ±8 coarse cells at each finer level.
PriceVector numeric_revenue_argmax(const MarketParams& params,
                                   double grid_step);

// Exhaustive scan of the full lattice. Only practical for coarse steps; used
// to validate the coarse-to-fine search.
PriceVector exhaustive_revenue_argmax(const MarketParams& params,
                                      double grid_step);

struct Gradient {
  double on_demand = 0.0;
  double spot = 0.0;
};

// Central differences of revenue().total.
Gradient revenue_gradient(const MarketParams& params, const PriceVector& prices,
                          double step);

// ∫ p_a γ_a 1{θ ∈ Θ_a} dθ on a uniform θ grid. Each cell is classified with
// best_response; cells containing a switch are split at the switch point,
// located by bisection.
Revenue integrate_revenue(const MarketParams& params, const PriceVector& prices,
                          std::size_t cells);

// ∫ (θ q_a − p_a) γ_a over each service's θ-interval, same quadrature.
AggregateUtilities integrate_aggregate_utilities(const MarketParams& params,
                                                 const PriceVector& prices,
                                                 std::size_t cells);

// Rejection sampler: q_o ~ U[10, 1000], q_s ~ U(0, q_o), γ_o, γ_s ~ U(0, 1],
// redrawn until the market has a unique equilibrium.
MarketParams sample_viable_params(std::mt19937_64& rng);

}  // namespace spotmarket

#endif  // SPOTMARKET_NUMERIC_CHECKS_HPP_

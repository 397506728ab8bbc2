#ifndef SPOTMARKET_VERIFICATION_HPP_
#define SPOTMARKET_VERIFICATION_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "spotmarket/equilibrium.hpp"
#include "spotmarket/ilp_solver.hpp"
#include "spotmarket/market_model.hpp"

namespace spotmarket {

// Anything that maps parameters to an equilibrium; the suite checks it
// against numeric oracles rather than trusting it.
using EquilibriumSolver = std::function<EquilibriumOutcome(const MarketParams&)>;

// Tolerances shared by the verify command and the acceptance suite.
struct Tolerances {
  double grid_step = 0.01;
  double price_abs = 0.02;
  double revenue_rel = 1e-4;
  std::size_t integration_cells = 1'000'000;
  double utility_rel = 1e-6;
  double gradient_rel = 1e-6;     // |∇π| <= gradient_rel · π
  double stationarity_rel = 1e-10;
};

// Each check compares the solver output with an oracle that does not call
// the closed form: a price lattice, θ-axis quadrature, finite differences,
// or (for the ILP) exhaustive enumeration.
struct PropertyResult {
  std::string name;
  std::size_t passed = 0;
  std::size_t failed = 0;
  std::string first_counterexample;  // empty when nothing failed
};

struct VerificationReport {
  std::vector<PropertyResult> properties;

  std::size_t passed() const;
  std::size_t failed() const;
  bool ok() const { return failed() == 0; }
};

struct VerificationOptions {
  std::uint64_t seed = 7;
  std::size_t draws = 200;
  Tolerances tolerances;
};

// Solver that returns the closed-form equilibrium.
EquilibriumOutcome closed_form_solver(const MarketParams& params);

VerificationReport run_property_suite(const VerificationOptions& options,
                                      const EquilibriumSolver& solver =
                                          closed_form_solver);

// Individual checks; each returns an empty string on success, otherwise a
// description of the mismatch.
std::string check_grid_oracle(const MarketParams& params,
                              const EquilibriumOutcome& outcome,
                              const Tolerances& tol);
std::string check_revenue_quadrature(const MarketParams& params,
                                     const EquilibriumOutcome& outcome,
                                     const Tolerances& tol);
std::string check_market_comparison(const MarketParams& params,
                                    const EquilibriumOutcome& outcome);
std::string check_price_ordering(const MarketParams& params,
                                 const EquilibriumOutcome& outcome);
std::string check_stationarity(const MarketParams& params,
                               const EquilibriumOutcome& outcome,
                               const Tolerances& tol);
std::string check_utility_quadrature(const MarketParams& params,
                                     const EquilibriumOutcome& outcome,
                                     const Tolerances& tol);
std::string check_ilp_against_enumeration(const ilp::Problem& problem);

// Random 0-1 program with integer data so ties between maximizers occur:
// objective in [-10, 10], 1 to 6 rows, n in [1, max_variables].
ilp::Problem random_ilp_problem(std::mt19937_64& rng, std::size_t max_variables);

std::string describe(const MarketParams& params);

}  // namespace spotmarket

#endif  // SPOTMARKET_VERIFICATION_HPP_

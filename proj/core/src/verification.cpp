#include "spotmarket/verification.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <exception>

#include "spotmarket/numeric_checks.hpp"

namespace spotmarket {
namespace {

double relative_gap(double value, double reference) {
  return std::abs(value - reference) / std::max(std::abs(reference), 1e-300);
}

std::string describe_prices(const PriceVector& p) {
  return fmt::format("p_o={:.17g} p_s={:.17g}", p.on_demand, p.spot);
}

// Draw-level checks that need a price vector inside the model's domain.
std::string check_domain(const EquilibriumOutcome& outcome) {
  const PriceVector& p = outcome.prices;
  if (!std::isfinite(p.on_demand) || !std::isfinite(p.spot) ||
      p.on_demand < 0.0 || p.spot < 0.0) {
    return "solver returned prices outside [0, inf): " + describe_prices(p);
  }
  return {};
}

}  // namespace

std::size_t VerificationReport::passed() const {
  std::size_t n = 0;
  for (const PropertyResult& p : properties) n += p.passed;
  return n;
}

std::size_t VerificationReport::failed() const {
  std::size_t n = 0;
  for (const PropertyResult& p : properties) n += p.failed;
  return n;
}

EquilibriumOutcome closed_form_solver(const MarketParams& params) {
  return equilibrium(params);
}

std::string describe(const MarketParams& params) {
  return fmt::format("q_o={:.17g} q_s={:.17g} gamma_o={:.17g} gamma_s={:.17g}",
                     params.qos_on_demand(), params.qos_spot(),
                     params.util_on_demand(), params.util_spot());
}

std::string check_grid_oracle(const MarketParams& params,
                              const EquilibriumOutcome& outcome,
                              const Tolerances& tol) {
  if (auto bad = check_domain(outcome); !bad.empty()) return bad;
  const PriceVector grid = numeric_revenue_argmax(params, tol.grid_step);
  const double grid_revenue = revenue(params, grid).total;
  const double d_o = std::abs(grid.on_demand - outcome.prices.on_demand);
  const double d_s = std::abs(grid.spot - outcome.prices.spot);
  const double rel = relative_gap(grid_revenue, outcome.revenue.total);
  if (d_o <= tol.price_abs && d_s <= tol.price_abs && rel <= tol.revenue_rel) {
    return {};
  }
  return fmt::format(
      "grid argmax ({}, {}) vs solver {}: |dp_o|={:.3g} |dp_s|={:.3g} "
      "(tol {}), revenue {:.17g} vs {:.17g} rel {:.3g} (tol {})",
      grid.on_demand, grid.spot, describe_prices(outcome.prices), d_o, d_s,
      tol.price_abs, grid_revenue, outcome.revenue.total, rel, tol.revenue_rel);
}

std::string check_revenue_quadrature(const MarketParams& params,
                                     const EquilibriumOutcome& outcome,
                                     const Tolerances& tol) {
  if (auto bad = check_domain(outcome); !bad.empty()) return bad;
  const Revenue numeric =
      integrate_revenue(params, outcome.prices, tol.integration_cells);
  const double rel = relative_gap(outcome.revenue.total, numeric.total);
  if (rel <= tol.utility_rel) return {};
  return fmt::format("revenue {:.17g} vs quadrature {:.17g} (rel {:.3g}) at {}",
                     outcome.revenue.total, numeric.total, rel,
                     describe_prices(outcome.prices));
}

std::string check_market_comparison(const MarketParams& params,
                                    const EquilibriumOutcome& outcome) {
  if (auto bad = check_domain(outcome); !bad.empty()) return bad;
  const BaselineOutcome base = on_demand_only_equilibrium(params);
  const MarketShares shares = market_shares(params, outcome.prices);
  const double share_o = shares.on_demand.length();
  const double served = share_o + shares.spot.length();
  const double total = revenue(params, outcome.prices).total;
  std::string why;
  if (!(outcome.prices.on_demand > base.price)) {
    why += fmt::format(" on-demand price {:.17g} <= baseline {:.17g};",
                       outcome.prices.on_demand, base.price);
  }
  if (!(share_o < base.share_length)) {
    why += fmt::format(" on-demand share {:.17g} >= baseline {:.17g};", share_o,
                       base.share_length);
  }
  if (!(served > base.share_length)) {
    why += fmt::format(" served share {:.17g} <= baseline {:.17g};", served,
                       base.share_length);
  }
  if (!(total > base.revenue)) {
    why += fmt::format(" revenue {:.17g} <= baseline {:.17g};", total,
                       base.revenue);
  }
  return why.empty() ? std::string() : "vs on-demand-only market:" + why;
}

std::string check_price_ordering(const MarketParams& params,
                                 const EquilibriumOutcome& outcome) {
  if (check_c0(params, outcome.prices)) return {};
  return fmt::format("p_o/q_o={:.17g} <= p_s/q_s={:.17g}",
                     outcome.prices.on_demand / params.qos_on_demand(),
                     outcome.prices.spot / params.qos_spot());
}

std::string check_stationarity(const MarketParams& params,
                               const EquilibriumOutcome& outcome,
                               const Tolerances& tol) {
  if (auto bad = check_domain(outcome); !bad.empty()) return bad;
  const double qo = params.qos_on_demand();
  const double qs = params.qos_spot();
  const double go = params.util_on_demand();
  const double gs = params.util_spot();
  const double eta = params.total_util();
  const PriceVector& p = outcome.prices;
  const double pi = revenue(params, p).total;

  std::string why;
  const double step = 1e-4 * qs;
  if (p.spot > step && p.on_demand > step) {
    const Gradient g = revenue_gradient(params, p, step);
    const double norm = std::hypot(g.on_demand, g.spot);
    if (!(norm <= tol.gradient_rel * pi)) {
      why += fmt::format(" |grad|={:.3g} > {:.3g};", norm, tol.gradient_rel * pi);
    }
  } else {
    why += " prices too close to zero for a central difference;";
  }

  // First-order conditions solved for one price given the other.
  const double spot_from_od = go / eta * (2.0 * p.on_demand - qo + qs);
  const double od_from_spot = 2.0 * gs * qo * p.spot / (eta * qs);
  if (!(relative_gap(spot_from_od, p.spot) <= tol.stationarity_rel)) {
    why += fmt::format(" spot condition {:.17g} vs {:.17g};", spot_from_od, p.spot);
  }
  if (!(relative_gap(od_from_spot, p.on_demand) <= tol.stationarity_rel)) {
    why += fmt::format(" on-demand condition {:.17g} vs {:.17g};", od_from_spot,
                       p.on_demand);
  }
  const HessianReport h = hessian_check(params, p);
  if (!(h.determinant_term > 0.0) || !h.negative_definite) {
    why += fmt::format(" Hessian not negative definite (det term {:.17g});",
                       h.determinant_term);
  }
  return why.empty() ? std::string() : "at " + describe_prices(p) + ":" + why;
}

std::string check_utility_quadrature(const MarketParams& params,
                                     const EquilibriumOutcome& outcome,
                                     const Tolerances& tol) {
  if (auto bad = check_domain(outcome); !bad.empty()) return bad;
  const AggregateUtilities numeric = integrate_aggregate_utilities(
      params, outcome.prices, tol.integration_cells);
  const double ro = relative_gap(outcome.utilities.on_demand, numeric.on_demand);
  const double rs = relative_gap(outcome.utilities.spot, numeric.spot);
  if (ro <= tol.utility_rel && rs <= tol.utility_rel) return {};
  return fmt::format(
      "aggregate utility on-demand {:.17g} vs {:.17g} (rel {:.3g}), "
      "spot {:.17g} vs {:.17g} (rel {:.3g})",
      outcome.utilities.on_demand, numeric.on_demand, ro, outcome.utilities.spot,
      numeric.spot, rs);
}

std::string check_ilp_against_enumeration(const ilp::Problem& problem) {
  const ilp::Solution fast = ilp::solve(problem);
  const ilp::Solution slow = ilp::solve_exhaustive(problem);
  if (fast.status != slow.status) return "status differs from enumeration";
  if (fast.status == ilp::Status::kInfeasible) return {};
  if (fast.objective_value != slow.objective_value ||
      fast.assignment != slow.assignment) {
    std::string a;
    std::string b;
    for (auto v : fast.assignment) a += v ? '1' : '0';
    for (auto v : slow.assignment) b += v ? '1' : '0';
    return fmt::format("n={} solve {} ({:.17g}) vs enumeration {} ({:.17g})",
                       problem.num_variables(), a, fast.objective_value, b,
                       slow.objective_value);
  }
  return {};
}

ilp::Problem random_ilp_problem(std::mt19937_64& rng, std::size_t max_variables) {
  std::uniform_int_distribution<std::size_t> size(1, max_variables);
  std::uniform_int_distribution<int> rows(1, 6);
  std::uniform_int_distribution<int> objective(-10, 10);
  std::uniform_int_distribution<int> coefficient(-4, 10);
  ilp::Problem problem;
  const std::size_t n = size(rng);
  for (std::size_t i = 0; i < n; ++i) problem.objective.push_back(objective(rng));
  const int m = rows(rng);
  for (int j = 0; j < m; ++j) {
    ilp::Constraint row;
    double positive = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      row.coefficients.push_back(coefficient(rng));
      positive += std::max(0.0, row.coefficients.back());
    }
    // Bound somewhere between slightly infeasible and slack.
    std::uniform_int_distribution<int> bound(-3, static_cast<int>(positive / 2) + 1);
    row.bound = bound(rng);
    problem.constraints.push_back(std::move(row));
  }
  return problem;
}

VerificationReport run_property_suite(const VerificationOptions& options,
                                      const EquilibriumSolver& solver) {
  VerificationReport report;
  report.properties = {
      {"closed form matches price-grid oracle", 0, 0, {}},
      {"revenue matches quadrature", 0, 0, {}},
      {"spot market beats on-demand-only market", 0, 0, {}},
      {"price per unit quality ordering", 0, 0, {}},
      {"first-order conditions and concavity", 0, 0, {}},
      {"aggregate utilities match quadrature", 0, 0, {}},
      {"ILP solver matches enumeration", 0, 0, {}},
  };
  const auto record = [&report](std::size_t index, const std::string& failure,
                                const std::string& context) {
    PropertyResult& p = report.properties[index];
    if (failure.empty()) {
      ++p.passed;
      return;
    }
    ++p.failed;
    if (p.first_counterexample.empty()) {
      p.first_counterexample = context + ": " + failure;
    }
  };

  std::mt19937_64 params_rng(options.seed);
  std::mt19937_64 ilp_rng(options.seed ^ 0x9e3779b97f4a7c15ULL);
  const Tolerances& tol = options.tolerances;
  for (std::size_t draw = 0; draw < options.draws; ++draw) {
    const MarketParams params = sample_viable_params(params_rng);
    const std::string context = fmt::format("draw {} ({})", draw, describe(params));
    EquilibriumOutcome outcome;
    try {
      outcome = solver(params);
    } catch (const std::exception& e) {
      for (std::size_t i = 0; i + 1 < report.properties.size(); ++i) {
        record(i, std::string("solver threw: ") + e.what(), context);
      }
      record(6, check_ilp_against_enumeration(random_ilp_problem(ilp_rng, 14)),
             fmt::format("ILP draw {}", draw));
      continue;
    }
    const auto guarded = [&](auto&& check) -> std::string {
      try {
        return check();
      } catch (const std::exception& e) {
        return std::string("check threw: ") + e.what();
      }
    };
    record(0, guarded([&] { return check_grid_oracle(params, outcome, tol); }), context);
    record(1, guarded([&] { return check_revenue_quadrature(params, outcome, tol); }),
           context);
    record(2, guarded([&] { return check_market_comparison(params, outcome); }),
           context);
    record(3, guarded([&] { return check_price_ordering(params, outcome); }), context);
    record(4, guarded([&] { return check_stationarity(params, outcome, tol); }),
           context);
    record(5, guarded([&] { return check_utility_quadrature(params, outcome, tol); }),
           context);
    record(6, check_ilp_against_enumeration(random_ilp_problem(ilp_rng, 14)),
           fmt::format("ILP draw {}", draw));
  }
  return report;
}

}  // namespace spotmarket

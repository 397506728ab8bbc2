#include "spotmarket/equilibrium.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace spotmarket {
namespace {

constexpr double kDenominatorFloor = 1e-9;

void require_equilibrium(const MarketParams& params) {
  const ViabilityReport report = diagnose_c1(params);
  if (!report.holds()) throw NoUniqueEquilibrium(report.failure());
  const double floor = kDenominatorFloor * params.util_on_demand() *
                       params.util_spot() * params.qos_on_demand();
  const double d = equilibrium_denominator(params);
  if (!(d > floor)) {
    throw NoUniqueEquilibrium(fmt::format(
        "C1 holds nominally but the equilibrium denominator {:.6g} is "
        "numerically singular (threshold {:.6g})",
        d, floor));
  }
}

bool close_relative(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-12});
}

}  // namespace

std::string ViabilityReport::failure() const {
  if (!upper_ok) {
    return fmt::format(
        "C1 upper bound γ_o < η/2 violated: γ_o = {:.6g}, η/2 = {:.6g}",
        util_on_demand, upper_bound);
  }
  if (!lower_ok) {
    return fmt::format(
        "C1 lower bound η·q_s/(2·q_o) < γ_o violated: η·q_s/(2·q_o) = {:.6g}, "
        "γ_o = {:.6g}",
        lower_bound, util_on_demand);
  }
  return {};
}

ViabilityReport diagnose_c1(const MarketParams& params) {
  const double eta = params.total_util();
  ViabilityReport r;
  r.util_on_demand = params.util_on_demand();
  r.lower_bound = eta * params.qos_spot() / (2.0 * params.qos_on_demand());
  r.upper_bound = eta / 2.0;
  r.lower_ok = r.lower_bound < r.util_on_demand;
  r.upper_ok = r.util_on_demand < r.upper_bound;
  return r;
}

bool check_c1(const MarketParams& params) { return diagnose_c1(params).holds(); }

double equilibrium_denominator(const MarketParams& params) {
  const double eta = params.total_util();
  return 4.0 * params.util_on_demand() * params.util_spot() *
             params.qos_on_demand() -
         eta * eta * params.qos_spot();
}

bool has_unique_equilibrium(const MarketParams& params) {
  try {
    require_equilibrium(params);
    return true;
  } catch (const NoUniqueEquilibrium&) {
    return false;
  }
}

ShareBoundaries equilibrium_share_boundaries(const MarketParams& params) {
  require_equilibrium(params);
  const double go = params.util_on_demand();
  const double gs = params.util_spot();
  const double qo = params.qos_on_demand();
  const double qs = params.qos_spot();
  const double eta = params.total_util();
  const double d = equilibrium_denominator(params);
  return {eta * go * (qo - qs) / d, (2.0 * go * gs * qo - eta * go * qs) / d};
}

AggregateUtilities aggregate_utilities(const MarketParams& params) {
  require_equilibrium(params);
  const double go = params.util_on_demand();
  const double gs = params.util_spot();
  const double qo = params.qos_on_demand();
  const double qs = params.qos_spot();
  const double eta = params.total_util();
  const double d = equilibrium_denominator(params);
  const double d2 = 2.0 * d * d;

  AggregateUtilities u;
  u.on_demand = qo * go * gs * (2.0 * go * qo - eta * qs) *
                (go * qs * (gs - go) + 2.0 * go * gs * (qo + qs) -
                 eta * eta * qs) /
                d2;
  u.spot = go * go * gs * qo * qo * qs * (gs - go) * (gs - go) / d2;
  return u;
}

EquilibriumOutcome equilibrium(const MarketParams& params) {
  require_equilibrium(params);
  const double go = params.util_on_demand();
  const double gs = params.util_spot();
  const double qo = params.qos_on_demand();
  const double qs = params.qos_spot();
  const double eta = params.total_util();
  const double d = equilibrium_denominator(params);

  EquilibriumOutcome out;
  out.prices.on_demand = 2.0 * go * gs * qo * (qo - qs) / d;
  out.prices.spot = eta * go * qs * (qo - qs) / d;

  const ShareBoundaries b = equilibrium_share_boundaries(params);
  out.shares.none = {0.0, b.none_spot};
  out.shares.spot = {b.none_spot, b.spot_on_demand};
  out.shares.on_demand = {b.spot_on_demand, 1.0};

  const double share_o = gs * (2.0 * go * qo - eta * qs) / d;
  const double share_s = go * (gs - go) * qo / d;
  out.revenue.on_demand = out.prices.on_demand * go * share_o;
  out.revenue.spot = out.prices.spot * gs * share_s;
  out.revenue.total = out.revenue.on_demand + out.revenue.spot;
  out.utilities = aggregate_utilities(params);

  if (!check_c0(params, out.prices)) {
    throw std::logic_error(
        "equilibrium prices violate the spot viability ordering");
  }
  return out;
}

BaselineOutcome on_demand_only_equilibrium(const MarketParams& params) {
  const double qo = params.qos_on_demand();
  return {qo / 2.0, 0.5, params.util_on_demand() * qo / 4.0};
}

double on_demand_only_aggregate_utility(const MarketParams& params) {
  return params.util_on_demand() * params.qos_on_demand() / 8.0;
}

ComparisonReport compare_markets(const MarketParams& params) {
  const EquilibriumOutcome eq = equilibrium(params);
  const BaselineOutcome base = on_demand_only_equilibrium(params);
  const double share_o = eq.shares.on_demand.length();
  const double share_s = eq.shares.spot.length();

  ComparisonReport r;
  r.price = {eq.prices.on_demand, base.price, eq.prices.on_demand > base.price};
  r.on_demand_share = {share_o, base.share_length, share_o < base.share_length};
  r.served_share = {share_o + share_s, base.share_length,
                    share_o + share_s > base.share_length};
  r.revenue = {eq.revenue.total, base.revenue, eq.revenue.total > base.revenue};
  return r;
}

HessianReport hessian_check(const MarketParams& params,
                            const PriceVector& prices) {
  const double go = params.util_on_demand();
  const double gs = params.util_spot();
  const double qo = params.qos_on_demand();
  const double qs = params.qos_spot();
  const double gap = qo - qs;

  HessianReport h;
  h.d2_on_demand = -2.0 * go / gap;
  h.d2_spot = -2.0 * gs / gap - 2.0 * gs / qs;
  h.d2_cross = (go + gs) / gap;
  h.trace = h.d2_on_demand + h.d2_spot;
  // Determinant times q_s (q_o − q_s)².
  h.determinant_term = equilibrium_denominator(params);
  h.negative_definite = h.trace < 0.0 && h.determinant_term > 0.0;

  const auto pi = [&](double po, double ps) {
    return revenue(params, {po, ps}).total;
  };
  const double step = 1e-4 * qo;
  const double po = prices.on_demand;
  const double ps = prices.spot;
  if (po < step || ps < step) {
    h.fd_on_demand = h.fd_spot = h.fd_cross = std::nan("");
    return h;
  }
  const double center = pi(po, ps);
  h.fd_on_demand =
      (pi(po + step, ps) - 2.0 * center + pi(po - step, ps)) / (step * step);
  h.fd_spot =
      (pi(po, ps + step) - 2.0 * center + pi(po, ps - step)) / (step * step);
  h.fd_cross = (pi(po + step, ps + step) - pi(po + step, ps - step) -
                pi(po - step, ps + step) + pi(po - step, ps - step)) /
               (4.0 * step * step);
  h.finite_difference_agrees = close_relative(h.fd_on_demand, h.d2_on_demand, 1e-4) &&
                               close_relative(h.fd_spot, h.d2_spot, 1e-4) &&
                               close_relative(h.fd_cross, h.d2_cross, 1e-4);
  return h;
}

}  // namespace spotmarket

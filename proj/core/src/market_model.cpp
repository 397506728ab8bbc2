#include "spotmarket/market_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace spotmarket {
namespace {

double clamp_unit(double x) { return std::clamp(x, 0.0, 1.0); }

struct Thresholds {
  double none_spot;       // p_s / q_s
  double spot_on_demand;  // (p_o - p_s) / (q_o - q_s)
  double none_on_demand;  // p_o / q_o, the boundary when spot is not viable
};

Thresholds thresholds(const MarketParams& params, const PriceVector& prices) {
  const double qo = params.qos_on_demand();
  const double qs = params.qos_spot();
  return {prices.spot / qs, (prices.on_demand - prices.spot) / (qo - qs),
          prices.on_demand / qo};
}

void require_prices(const PriceVector& prices) {
  if (!(prices.on_demand >= 0.0) || !(prices.spot >= 0.0)) {
    throw std::invalid_argument("prices must be finite and non-negative");
  }
}

}  // namespace

MarketParams::MarketParams(double qos_on_demand, double qos_spot,
                           double util_on_demand, double util_spot,
                           double capacity)
    : qos_on_demand_(qos_on_demand),
      qos_spot_(qos_spot),
      util_on_demand_(util_on_demand),
      util_spot_(util_spot),
      capacity_(capacity) {
  if (!(qos_spot > 0.0) || !std::isfinite(qos_spot)) {
    throw std::invalid_argument("spot QoS must be positive, got " +
                                std::to_string(qos_spot));
  }
  if (!(qos_on_demand > qos_spot) || !std::isfinite(qos_on_demand)) {
    throw std::invalid_argument(
        "on-demand QoS must exceed spot QoS (got q_o=" +
        std::to_string(qos_on_demand) + ", q_s=" + std::to_string(qos_spot) +
        ")");
  }
  if (!(util_on_demand > 0.0) || !(util_spot > 0.0) ||
      !std::isfinite(util_on_demand) || !std::isfinite(util_spot)) {
    throw std::invalid_argument("average utilizations must be positive");
  }
  if (!(capacity > 0.0)) {
    throw std::invalid_argument("capacity must be positive");
  }
}

Customer::Customer(double willingness, double demand)
    : willingness(willingness), demand(demand) {
  if (!(willingness >= 0.0 && willingness <= 1.0)) {
    throw std::invalid_argument("willingness to pay must lie in [0, 1]");
  }
  if (!(demand >= 0.0)) {
    throw std::invalid_argument("demand must be non-negative");
  }
}

std::string_view to_string(ServiceChoice choice) {
  switch (choice) {
    case ServiceChoice::kOnDemand:
      return "on-demand";
    case ServiceChoice::kSpot:
      return "spot";
    case ServiceChoice::kNone:
      return "none";
  }
  return "unknown";
}

double customer_utility(const Customer& customer, ServiceChoice choice,
                        const MarketParams& params, const PriceVector& prices) {
  switch (choice) {
    case ServiceChoice::kOnDemand:
      return customer.willingness * params.qos_on_demand() * customer.demand -
             prices.on_demand * customer.demand;
    case ServiceChoice::kSpot:
      return customer.willingness * params.qos_spot() * customer.demand -
             prices.spot * customer.demand;
    case ServiceChoice::kNone:
      return 0.0;
  }
  return 0.0;
}

MarketShares market_shares(const MarketParams& params,
                           const PriceVector& prices) {
  require_prices(prices);
  const Thresholds t = thresholds(params, prices);
  MarketShares shares;
  if (check_c0(params, prices)) {
    const double lo = clamp_unit(t.none_spot);
    const double hi = clamp_unit(t.spot_on_demand);
    shares.none = {0.0, lo};
    shares.spot = {lo, hi};
    shares.on_demand = {hi, 1.0};
  } else {
    // Every would-be spot customer does at least as well on on-demand.
    const double b = clamp_unit(t.none_on_demand);
    shares.none = {0.0, b};
    shares.spot = {b, b};
    shares.on_demand = {b, 1.0};
  }
  return shares;
}

ServiceChoice best_response(double theta, const MarketParams& params,
                            const PriceVector& prices) {
  if (!(theta >= 0.0 && theta <= 1.0)) {
    throw std::invalid_argument("willingness to pay must lie in [0, 1]");
  }
  const MarketShares shares = market_shares(params, prices);
  if (shares.on_demand.contains(theta)) return ServiceChoice::kOnDemand;
  if (shares.spot.contains(theta)) return ServiceChoice::kSpot;
  return ServiceChoice::kNone;
}

bool check_c0(const MarketParams& params, const PriceVector& prices) {
  return prices.on_demand / params.qos_on_demand() >
         prices.spot / params.qos_spot();
}

Revenue revenue(const MarketParams& params, const PriceVector& prices) {
  const MarketShares shares = market_shares(params, prices);
  Revenue r;
  r.on_demand =
      prices.on_demand * params.util_on_demand() * shares.on_demand.length();
  r.spot = prices.spot * params.util_spot() * shares.spot.length();
  r.total = r.on_demand + r.spot;
  return r;
}

}  // namespace spotmarket

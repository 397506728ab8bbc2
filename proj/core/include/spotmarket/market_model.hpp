#ifndef SPOTMARKET_MARKET_MODEL_HPP_
#define SPOTMARKET_MARKET_MODEL_HPP_

#include <limits>
#include <string_view>

namespace spotmarket {

// Parameterization of one cluster at one time slot: the QoS each service
// guarantees and the average resource utilization of the customers who pick
// it. Construction enforces qos_on_demand > qos_spot > 0, positive
// utilizations and positive capacity.
class MarketParams {
 public:
  MarketParams(double qos_on_demand, double qos_spot, double util_on_demand,
               double util_spot,
               double capacity = std::numeric_limits<double>::infinity());

  double qos_on_demand() const { return qos_on_demand_; }
  double qos_spot() const { return qos_spot_; }
  double util_on_demand() const { return util_on_demand_; }
  double util_spot() const { return util_spot_; }
  // Sum of both utilizations.
  double total_util() const { return util_on_demand_ + util_spot_; }
  double capacity() const { return capacity_; }

 private:
  double qos_on_demand_;
  double qos_spot_;
  double util_on_demand_;
  double util_spot_;
  double capacity_;
};

// Unit prices set by the provider. Not choosing a service costs nothing, so
// there is no third price.
struct PriceVector {
  double on_demand = 0.0;
  double spot = 0.0;
};

struct Customer {
  Customer(double willingness, double demand);

  double willingness;  // in [0, 1]
  double demand;       // resource units per slot
};

enum class ServiceChoice { kOnDemand, kSpot, kNone };

std::string_view to_string(ServiceChoice choice);

// Half-open interval (lower, upper] inside [0, 1]. Empty when upper <= lower.
struct Interval {
  double lower = 0.0;
  double upper = 0.0;

  double length() const { return upper > lower ? upper - lower : 0.0; }
  bool empty() const { return !(upper > lower); }
  bool contains(double x) const { return x > lower && x <= upper; }
};

// Partition of the willingness-to-pay axis by chosen service. `none` always
// starts at 0 and is closed there, so θ = 0 belongs to it.
struct MarketShares {
  Interval none;
  Interval spot;
  Interval on_demand;
};

struct Revenue {
  double on_demand = 0.0;
  double spot = 0.0;
  double total = 0.0;
};

double customer_utility(const Customer& customer, ServiceChoice choice,
                        const MarketParams& params, const PriceVector& prices);

// Stage-II best response of a customer with willingness `theta`. A θ sitting
// exactly on a threshold goes to the lower interval (intervals are open below
// and closed above).
ServiceChoice best_response(double theta, const MarketParams& params,
                            const PriceVector& prices);

MarketShares market_shares(const MarketParams& params,
                           const PriceVector& prices);

// Price per unit of quality is strictly lower for spot than for on-demand.
bool check_c0(const MarketParams& params, const PriceVector& prices);

Revenue revenue(const MarketParams& params, const PriceVector& prices);

}  // namespace spotmarket

#endif  // SPOTMARKET_MARKET_MODEL_HPP_

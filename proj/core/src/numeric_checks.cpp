#include "spotmarket/numeric_checks.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace spotmarket {
namespace {

constexpr std::int64_t kMaxExhaustivePoints = 1'000'000;
constexpr std::int64_t kZoomWindowCells = 8;

struct LatticeBest {
  std::int64_t i = 0;
  std::int64_t j = 0;
  double value = -1.0;
};

class RevenueLattice {
 public:
  RevenueLattice(const MarketParams& params, double step)
      : params_(params), step_(step) {
    if (!(step > 0.0)) throw std::invalid_argument("grid step must be positive");
    max_i_ = static_cast<std::int64_t>(
        std::floor(params.qos_on_demand() / step * (1.0 + 1e-12)));
    max_j_ = static_cast<std::int64_t>(
        std::floor(params.qos_spot() / step * (1.0 + 1e-12)));
  }

  std::int64_t max_i() const { return max_i_; }
  std::int64_t max_j() const { return max_j_; }

  double value(std::int64_t i, std::int64_t j) const {
    return revenue(params_, {static_cast<double>(i) * step_,
                             static_cast<double>(j) * step_})
        .total;
  }

  // Scans indices that are multiples of `stride` in [i_lo, i_hi] × [j_lo, j_hi].
  void scan(std::int64_t stride, std::int64_t i_lo, std::int64_t i_hi,
            std::int64_t j_lo, std::int64_t j_hi, LatticeBest& best) const {
    const auto first = [stride](std::int64_t lo) {
      return ((std::max<std::int64_t>(lo, 0) + stride - 1) / stride) * stride;
    };
    for (std::int64_t i = first(i_lo); i <= std::min(i_hi, max_i_); i += stride) {
      for (std::int64_t j = first(j_lo); j <= std::min(j_hi, max_j_);
           j += stride) {
        const double v = value(i, j);
        if (v > best.value) best = {i, j, v};
      }
    }
  }

  PriceVector prices(const LatticeBest& best) const {
    return {static_cast<double>(best.i) * step_,
            static_cast<double>(best.j) * step_};
  }

 private:
  const MarketParams& params_;
  double step_;
  std::int64_t max_i_ = 0;
  std::int64_t max_j_ = 0;
};

int rank(ServiceChoice c) {
  switch (c) {
    case ServiceChoice::kNone:
      return 0;
    case ServiceChoice::kSpot:
      return 1;
    case ServiceChoice::kOnDemand:
      return 2;
  }
  return 0;
}

constexpr std::array<ServiceChoice, 3> kByRank = {
    ServiceChoice::kNone, ServiceChoice::kSpot, ServiceChoice::kOnDemand};

// Walks [0, 1] in `cells` equal cells and calls visit(choice, lo, hi) for
// every maximal sub-segment on which best_response is constant. Choices are
// monotone in θ (none < spot < on-demand), so each transition inside a cell
// is found by bisecting on rank(best_response(θ)) >= k.
template <typename Visit>
void walk_segments(const MarketParams& params, const PriceVector& prices,
                   std::size_t cells, Visit&& visit) {
  if (cells == 0) throw std::invalid_argument("cell count must be positive");
  const auto rank_at = [&](double theta) {
    return rank(best_response(theta, params, prices));
  };
  const double h = 1.0 / static_cast<double>(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    const double a = static_cast<double>(c) * h;
    const double b = c + 1 == cells ? 1.0 : static_cast<double>(c + 1) * h;
    const int r_left = rank_at(std::nextafter(a, 1.0));
    const int r_right = rank_at(b);
    double seg_lo = a;
    int current = r_left;
    for (int k = r_left + 1; k <= r_right; ++k) {
      double lo = seg_lo;
      double hi = b;
      for (int it = 0; it < 200 && std::nextafter(lo, hi) < hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (rank_at(mid) >= k) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      // The rank at hi may skip past k when two thresholds share the point.
      visit(kByRank[current], seg_lo, hi);
      seg_lo = hi;
      current = k;
    }
    visit(kByRank[current], seg_lo, b);
  }
}

}  // namespace

PriceVector exhaustive_revenue_argmax(const MarketParams& params,
                                      double grid_step) {
  const RevenueLattice lattice(params, grid_step);
  LatticeBest best;
  lattice.scan(1, 0, lattice.max_i(), 0, lattice.max_j(), best);
  return lattice.prices(best);
}

PriceVector numeric_revenue_argmax(const MarketParams& params,
                                   double grid_step) {
  const RevenueLattice lattice(params, grid_step);
  std::int64_t stride = 1;
  while ((lattice.max_i() / stride + 1) * (lattice.max_j() / stride + 1) >
         kMaxExhaustivePoints) {
    stride *= 10;
  }
  LatticeBest best;
  lattice.scan(stride, 0, lattice.max_i(), 0, lattice.max_j(), best);
  while (stride > 1) {
    const std::int64_t window = kZoomWindowCells * stride;
    stride /= 10;
    const LatticeBest center = best;
    lattice.scan(stride, center.i - window, center.i + window,
                 center.j - window, center.j + window, best);
  }
  return lattice.prices(best);
}

Gradient revenue_gradient(const MarketParams& params, const PriceVector& prices,
                          double step) {
  const auto pi = [&](double po, double ps) {
    return revenue(params, {po, ps}).total;
  };
  const double po = prices.on_demand;
  const double ps = prices.spot;
  return {(pi(po + step, ps) - pi(po - step, ps)) / (2.0 * step),
          (pi(po, ps + step) - pi(po, ps - step)) / (2.0 * step)};
}

Revenue integrate_revenue(const MarketParams& params, const PriceVector& prices,
                          std::size_t cells) {
  Revenue r;
  walk_segments(params, prices, cells,
                [&](ServiceChoice choice, double lo, double hi) {
                  const double len = hi - lo;
                  if (choice == ServiceChoice::kOnDemand) {
                    r.on_demand += prices.on_demand * params.util_on_demand() * len;
                  } else if (choice == ServiceChoice::kSpot) {
                    r.spot += prices.spot * params.util_spot() * len;
                  }
                });
  r.total = r.on_demand + r.spot;
  return r;
}

AggregateUtilities integrate_aggregate_utilities(const MarketParams& params,
                                                 const PriceVector& prices,
                                                 std::size_t cells) {
  AggregateUtilities u;
  // Utility is linear in θ on each segment, so the midpoint value is exact.
  walk_segments(params, prices, cells,
                [&](ServiceChoice choice, double lo, double hi) {
                  const double mid = 0.5 * (lo + hi);
                  const double len = hi - lo;
                  if (choice == ServiceChoice::kOnDemand) {
                    u.on_demand += (mid * params.qos_on_demand() - prices.on_demand) *
                                   params.util_on_demand() * len;
                  } else if (choice == ServiceChoice::kSpot) {
                    u.spot += (mid * params.qos_spot() - prices.spot) *
                              params.util_spot() * len;
                  }
                });
  return u;
}

MarketParams sample_viable_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> qos_on_demand(10.0, 1000.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (;;) {
    const double qo = qos_on_demand(rng);
    const double qs = qo * unit(rng);
    // U(0, 1] from U[0, 1).
    const double go = 1.0 - unit(rng);
    const double gs = 1.0 - unit(rng);
    if (!(qs > 0.0) || !(qs < qo)) continue;
    const MarketParams params(qo, qs, go, gs);
    if (has_unique_equilibrium(params)) return params;
  }
}

}  // namespace spotmarket

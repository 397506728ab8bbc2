#ifndef SPOTMARKET_SIMULATOR_HPP_
#define SPOTMARKET_SIMULATOR_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spotmarket::sim {

enum class InstanceKind { kOnDemand, kSpot };
enum class InstanceStatus { kRunning, kEvicted, kCompleted };
enum class Algorithm { kHeuristic, kIlp, kNone };
enum class SpotPricingMode { kFixedFloor, kAuction };

std::string_view to_string(Algorithm algorithm);

struct InstanceRequest {
  std::int64_t request_id = 0;
  std::int64_t arrival_slot = 0;
  InstanceKind kind = InstanceKind::kOnDemand;
  double cpu_demand = 0.0;
  double ram_demand = 0.0;
  std::optional<double> max_bid;  // spot only
  std::optional<std::int64_t> lifetime;  // slots; empty means open-ended

  double bid() const { return max_bid.value_or(0.0); }

  // Throws std::invalid_argument when demands are not positive, a spot
  // request lacks a non-negative bid, an on-demand request carries one, or
  // the lifetime is not positive.
  void validate() const;
};

struct InstanceState {
  InstanceRequest request;
  int node_id = 0;
  std::int64_t start_slot = 0;
  double cpu_workload = 0.0;
  double ram_workload = 0.0;
  InstanceStatus status = InstanceStatus::kRunning;

  bool is_spot() const { return request.kind == InstanceKind::kSpot; }
  double bid() const { return request.bid(); }
};

struct NodeState {
  int node_id = 0;
  double cpu_capacity = 0.0;
  double ram_capacity = 0.0;
  std::vector<InstanceState> running;

  double cpu_used() const;
  double ram_used() const;
  double cpu_fraction() const { return cpu_used() / cpu_capacity; }
  double ram_fraction() const { return ram_used() / ram_capacity; }
  // The larger of the CPU and RAM fractions; every threshold test uses it.
  double utilization() const;
};

class ThresholdPolicy {
 public:
  // Requires 0 < soft < hard < 1.
  ThresholdPolicy(double soft, double hard);

  double soft() const { return soft_; }
  double hard() const { return hard_; }

 private:
  double soft_;
  double hard_;
};

class PricingPolicy {
 public:
  // Requires 0 <= spot_floor <= on_demand_price.
  PricingPolicy(double on_demand_price, double spot_floor,
                SpotPricingMode mode = SpotPricingMode::kAuction);

  double on_demand_price() const { return on_demand_price_; }
  double spot_floor() const { return spot_floor_; }
  SpotPricingMode mode() const { return mode_; }

 private:
  double on_demand_price_;
  double spot_floor_;
  SpotPricingMode mode_;
};

// Uniform-price multi-unit auction bounded below by the floor.
struct AuctionResult {
  double price = 0.0;
  std::vector<std::size_t> admitted;  // bid indices, highest bid first
};

// Bids below the floor are rejected. The rest are ranked by bid (descending,
// ties by index) and the first `admit_capacity` are admitted. The price is
// the highest eligible bid that was not admitted, or the floor when every
// eligible bid got in.
AuctionResult clear_spot_price(std::span<const double> bids,
                               std::size_t admit_capacity, double floor);

struct Placement {
  std::size_t request_index = 0;  // into the requests passed to provisioning
  int node_id = 0;
};

struct Eviction {
  int node_id = 0;
  std::int64_t request_id = 0;
};

struct PlacementPlan {
  std::vector<Eviction> evictions;  // applied before placements
  std::vector<Placement> placements;
  std::vector<std::size_t> rejected;  // request indices
};

// Spot instances on `node` in the order they are reclaimed: lowest bid first,
// then youngest (latest start slot, then highest request id).
std::vector<const InstanceState*> eviction_order(const NodeState& node);

// Greedy node traversal. On-demand requests first, in the given order: the
// least-utilized node able to host the request under the hard threshold once
// all of its spot instances are gone is chosen; spot instances there are
// reclaimed while the node sits above the soft threshold or the placement
// would break the hard threshold. Spot requests follow, highest bid first,
// each placed on the least-utilized node that stays at or below the soft
// threshold.
PlacementPlan heuristic_provision(std::span<const InstanceRequest> requests,
                                  std::span<const NodeState> cluster,
                                  const ThresholdPolicy& thresholds,
                                  const PricingPolicy& pricing);

// Weight multiplying the on-demand price in the ILP objective.
inline constexpr double kOnDemandPriorityWeight = 1000.0;
// Objective cost of reclaiming one spot instance.
inline constexpr double kEvictionPenalty = 0.001;

// Binary program over placements y[r][n] and reclamations e[j]; see
// simulator.cpp for the rows. Throws ilp::ProblemTooLarge when the slot needs
// more decision variables than the solver accepts.
PlacementPlan ilp_provision(std::span<const InstanceRequest> requests,
                            std::span<const NodeState> cluster,
                            const ThresholdPolicy& thresholds,
                            const PricingPolicy& pricing, double spot_price);

struct SimulationConfig {
  int nodes = 3;
  double cpu_capacity = 100.0;
  double ram_capacity = 100.0;
  ThresholdPolicy thresholds{0.5, 0.7};
  PricingPolicy pricing{10.0, 3.0};
  Algorithm algorithm = Algorithm::kHeuristic;
  std::uint64_t seed = 1;
  // Number of slots to simulate; defaults to one past the last arrival.
  std::optional<std::int64_t> slots;
  // run() writes the slot CSV here when set.
  std::optional<std::string> output_path;
};

struct SlotRecord {
  std::int64_t slot = 0;
  std::vector<double> node_cpu;  // fractions of capacity
  std::vector<double> node_ram;
  std::vector<double> node_utilization;
  double avg_cpu = 0.0;
  double avg_ram = 0.0;
  double spot_price = 0.0;
  double revenue = 0.0;
  double cumulative_revenue = 0.0;
  std::int64_t evictions = 0;
  std::int64_t rejections = 0;
  std::int64_t on_demand_running = 0;
  std::int64_t spot_running = 0;
};

// Discrete-time cluster state machine; one call to step() advances one slot.
class Simulator {
 public:
  Simulator(SimulationConfig config, std::vector<InstanceRequest> trace);

  // Advances one slot. Returns std::nullopt once every slot has been run.
  std::optional<SlotRecord> step();

  std::int64_t horizon() const { return horizon_; }
  std::int64_t current_slot() const { return slot_; }
  const std::vector<NodeState>& cluster() const { return cluster_; }
  // Instances that left the cluster, with their final status.
  const std::vector<InstanceState>& departed() const { return departed_; }
  const SimulationConfig& config() const { return config_; }

 private:
  void retire_completed();
  void resample_workloads();
  std::size_t spot_admission_capacity(
      std::span<const InstanceRequest> spot_requests) const;
  void apply(const PlacementPlan& plan,
             std::span<const InstanceRequest> requests);
  std::int64_t sweep_hard_threshold();
  void evict(NodeState& node, std::int64_t request_id);

  SimulationConfig config_;
  std::vector<InstanceRequest> trace_;
  std::size_t next_request_ = 0;
  std::vector<NodeState> cluster_;
  std::vector<InstanceState> departed_;
  std::mt19937_64 rng_;
  std::int64_t slot_ = 0;
  std::int64_t horizon_ = 0;
  double cumulative_revenue_ = 0.0;
  std::int64_t evictions_this_slot_ = 0;
};

std::vector<SlotRecord> run(const SimulationConfig& config,
                            std::vector<InstanceRequest> trace);

}  // namespace spotmarket::sim

#endif  // SPOTMARKET_SIMULATOR_HPP_

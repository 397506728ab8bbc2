#include "spotmarket/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>

#include "spotmarket/ilp_solver.hpp"
#include "spotmarket/trace_io.hpp"

namespace spotmarket::sim {
namespace {

constexpr double kTolerance = 1e-9;

struct SpotRef {
  std::int64_t request_id;
  double cpu;
  double ram;
};

// Scratch copy of a node used while planning a slot.
struct WorkingNode {
  int id = 0;
  double cpu_capacity = 0.0;
  double ram_capacity = 0.0;
  double cpu = 0.0;
  double ram = 0.0;
  std::vector<SpotRef> spots;  // eviction order

  double utilization_with(double extra_cpu, double extra_ram) const {
    return std::max((cpu + extra_cpu) / cpu_capacity,
                    (ram + extra_ram) / ram_capacity);
  }
  double utilization() const { return utilization_with(0.0, 0.0); }
  double spot_cpu() const {
    double s = 0.0;
    for (const SpotRef& r : spots) s += r.cpu;
    return s;
  }
  double spot_ram() const {
    double s = 0.0;
    for (const SpotRef& r : spots) s += r.ram;
    return s;
  }
};

std::vector<WorkingNode> working_copy(std::span<const NodeState> cluster) {
  std::vector<WorkingNode> nodes;
  nodes.reserve(cluster.size());
  for (const NodeState& n : cluster) {
    WorkingNode w;
    w.id = n.node_id;
    w.cpu_capacity = n.cpu_capacity;
    w.ram_capacity = n.ram_capacity;
    w.cpu = n.cpu_used();
    w.ram = n.ram_used();
    for (const InstanceState* s : eviction_order(n)) {
      w.spots.push_back({s->request.request_id, s->cpu_workload, s->ram_workload});
    }
    nodes.push_back(std::move(w));
  }
  return nodes;
}

// Least-utilized node satisfying `fits`, ties to the lowest node id.
template <typename Fits>
WorkingNode* least_utilized(std::vector<WorkingNode>& nodes, Fits&& fits) {
  WorkingNode* best = nullptr;
  for (WorkingNode& n : nodes) {
    if (!fits(n)) continue;
    if (best == nullptr || n.utilization() < best->utilization() ||
        (n.utilization() == best->utilization() && n.id < best->id)) {
      best = &n;
    }
  }
  return best;
}

// Spot request indices ranked by bid, highest first, ties by position.
std::vector<std::size_t> spot_by_bid(std::span<const InstanceRequest> requests) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    if (requests[i].kind == InstanceKind::kSpot) idx.push_back(i);
  }
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return requests[a].bid() > requests[b].bid();
  });
  return idx;
}

}  // namespace

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kHeuristic:
      return "heuristic";
    case Algorithm::kIlp:
      return "ilp";
    case Algorithm::kNone:
      return "none";
  }
  return "unknown";
}

void InstanceRequest::validate() const {
  if (!(cpu_demand > 0.0) || !(ram_demand > 0.0)) {
    throw std::invalid_argument("request " + std::to_string(request_id) +
                                ": demands must be positive");
  }
  if (kind == InstanceKind::kSpot) {
    if (!max_bid || !(*max_bid >= 0.0)) {
      throw std::invalid_argument("request " + std::to_string(request_id) +
                                  ": spot requests need a non-negative bid");
    }
  } else if (max_bid) {
    throw std::invalid_argument("request " + std::to_string(request_id) +
                                ": on-demand requests carry no bid");
  }
  if (lifetime && *lifetime <= 0) {
    throw std::invalid_argument("request " + std::to_string(request_id) +
                                ": lifetime must be positive");
  }
  if (arrival_slot < 0) {
    throw std::invalid_argument("request " + std::to_string(request_id) +
                                ": arrival slot must be non-negative");
  }
}

double NodeState::cpu_used() const {
  double s = 0.0;
  for (const InstanceState& i : running) s += i.cpu_workload;
  return s;
}

double NodeState::ram_used() const {
  double s = 0.0;
  for (const InstanceState& i : running) s += i.ram_workload;
  return s;
}

double NodeState::utilization() const {
  return std::max(cpu_fraction(), ram_fraction());
}

ThresholdPolicy::ThresholdPolicy(double soft, double hard)
    : soft_(soft), hard_(hard) {
  if (!(soft > 0.0 && soft < hard && hard < 1.0)) {
    throw std::invalid_argument(
        "thresholds must satisfy 0 < th_soft < th_hard < 1");
  }
}

PricingPolicy::PricingPolicy(double on_demand_price, double spot_floor,
                             SpotPricingMode mode)
    : on_demand_price_(on_demand_price), spot_floor_(spot_floor), mode_(mode) {
  if (!(spot_floor >= 0.0 && spot_floor <= on_demand_price)) {
    throw std::invalid_argument(
        "pricing must satisfy 0 <= spot_floor <= on_demand_price");
  }
}

AuctionResult clear_spot_price(std::span<const double> bids,
                               std::size_t admit_capacity, double floor) {
  if (!(floor >= 0.0)) throw std::invalid_argument("floor must be non-negative");
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < bids.size(); ++i) {
    if (bids[i] >= floor) eligible.push_back(i);
  }
  std::stable_sort(eligible.begin(), eligible.end(),
                   [&](std::size_t a, std::size_t b) { return bids[a] > bids[b]; });
  AuctionResult result;
  result.price = floor;
  const std::size_t admitted = std::min(admit_capacity, eligible.size());
  result.admitted.assign(eligible.begin(), eligible.begin() + admitted);
  if (admitted < eligible.size()) {
    result.price = std::max(floor, bids[eligible[admitted]]);
  }
  return result;
}

std::vector<const InstanceState*> eviction_order(const NodeState& node) {
  std::vector<const InstanceState*> spots;
  for (const InstanceState& i : node.running) {
    if (i.is_spot()) spots.push_back(&i);
  }
  std::sort(spots.begin(), spots.end(),
            [](const InstanceState* a, const InstanceState* b) {
              if (a->bid() != b->bid()) return a->bid() < b->bid();
              if (a->start_slot != b->start_slot) {
                return a->start_slot > b->start_slot;
              }
              return a->request.request_id > b->request.request_id;
            });
  return spots;
}

PlacementPlan heuristic_provision(std::span<const InstanceRequest> requests,
                                  std::span<const NodeState> cluster,
                                  const ThresholdPolicy& thresholds,
                                  const PricingPolicy& /*pricing*/) {
  std::vector<WorkingNode> nodes = working_copy(cluster);
  PlacementPlan plan;
  const double soft = thresholds.soft() + kTolerance;
  const double hard = thresholds.hard() + kTolerance;

  for (std::size_t r = 0; r < requests.size(); ++r) {
    const InstanceRequest& req = requests[r];
    if (req.kind != InstanceKind::kOnDemand) continue;
    WorkingNode* node = least_utilized(nodes, [&](const WorkingNode& n) {
      const double cpu = n.cpu - n.spot_cpu() + req.cpu_demand;
      const double ram = n.ram - n.spot_ram() + req.ram_demand;
      return std::max(cpu / n.cpu_capacity, ram / n.ram_capacity) <= hard;
    });
    if (node == nullptr) {
      plan.rejected.push_back(r);
      continue;
    }
    while (!node->spots.empty() &&
           (node->utilization() > soft ||
            node->utilization_with(req.cpu_demand, req.ram_demand) > hard)) {
      const SpotRef victim = node->spots.front();
      node->spots.erase(node->spots.begin());
      node->cpu -= victim.cpu;
      node->ram -= victim.ram;
      plan.evictions.push_back({node->id, victim.request_id});
    }
    node->cpu += req.cpu_demand;
    node->ram += req.ram_demand;
    plan.placements.push_back({r, node->id});
  }

  for (std::size_t r : spot_by_bid(requests)) {
    const InstanceRequest& req = requests[r];
    WorkingNode* node = least_utilized(nodes, [&](const WorkingNode& n) {
      return n.utilization_with(req.cpu_demand, req.ram_demand) <= soft;
    });
    if (node == nullptr) {
      plan.rejected.push_back(r);
      continue;
    }
    node->cpu += req.cpu_demand;
    node->ram += req.ram_demand;
    plan.placements.push_back({r, node->id});
  }
  return plan;
}

// Variables: y[r][n] for every request and node (requests in the given
// order, nodes in cluster order), then e[j] for every running spot instance,
// grouped by node in eviction order. Rows:
//   Σ_n y[r][n] <= 1                                          per request
//   Σ_r d_r y[r][n] − Σ_j w_j e_j <= th_hard·cap − used        per node, resource
//   same load + M·y[s][n] <= th_soft·cap − used + M            per spot s, node, resource
//   e[k+1] − e[k] <= 0                                         eviction prefix
// The last family keeps reclamation in eviction order on every node.
PlacementPlan ilp_provision(std::span<const InstanceRequest> requests,
                            std::span<const NodeState> cluster,
                            const ThresholdPolicy& thresholds,
                            const PricingPolicy& pricing, double spot_price) {
  PlacementPlan plan;
  if (requests.empty()) return plan;

  const std::size_t num_nodes = cluster.size();
  const std::size_t num_y = requests.size() * num_nodes;
  struct EvictVar {
    int node_id;
    std::size_t node_index;
    std::int64_t request_id;
    double cpu;
    double ram;
  };
  std::vector<EvictVar> evict_vars;
  for (std::size_t n = 0; n < num_nodes; ++n) {
    for (const InstanceState* s : eviction_order(cluster[n])) {
      evict_vars.push_back({cluster[n].node_id, n, s->request.request_id,
                            s->cpu_workload, s->ram_workload});
    }
  }
  const std::size_t num_vars = num_y + evict_vars.size();
  if (num_vars > ilp::kDefaultMaxVariables) {
    throw ilp::ProblemTooLarge(
        "slot needs " + std::to_string(num_vars) +
        " ILP decision variables, solver limit is " +
        std::to_string(ilp::kDefaultMaxVariables));
  }
  const auto y = [num_nodes](std::size_t r, std::size_t n) {
    return r * num_nodes + n;
  };

  ilp::Problem problem;
  problem.objective.assign(num_vars, 0.0);
  for (std::size_t r = 0; r < requests.size(); ++r) {
    const double value =
        requests[r].kind == InstanceKind::kOnDemand
            ? pricing.on_demand_price() * kOnDemandPriorityWeight
            : spot_price;
    for (std::size_t n = 0; n < num_nodes; ++n) problem.objective[y(r, n)] = value;
  }
  for (std::size_t j = 0; j < evict_vars.size(); ++j) {
    problem.objective[num_y + j] = -kEvictionPenalty;
  }

  for (std::size_t r = 0; r < requests.size(); ++r) {
    ilp::Constraint row{std::vector<double>(num_vars, 0.0), 1.0};
    for (std::size_t n = 0; n < num_nodes; ++n) row.coefficients[y(r, n)] = 1.0;
    problem.constraints.push_back(std::move(row));
  }

  double total_cpu_demand = 0.0;
  double total_ram_demand = 0.0;
  for (const InstanceRequest& r : requests) {
    total_cpu_demand += r.cpu_demand;
    total_ram_demand += r.ram_demand;
  }

  for (std::size_t n = 0; n < num_nodes; ++n) {
    const NodeState& node = cluster[n];
    for (int resource = 0; resource < 2; ++resource) {
      const bool cpu = resource == 0;
      const double used = cpu ? node.cpu_used() : node.ram_used();
      const double cap = cpu ? node.cpu_capacity : node.ram_capacity;
      std::vector<double> load(num_vars, 0.0);
      for (std::size_t r = 0; r < requests.size(); ++r) {
        load[y(r, n)] = cpu ? requests[r].cpu_demand : requests[r].ram_demand;
      }
      for (std::size_t j = 0; j < evict_vars.size(); ++j) {
        if (evict_vars[j].node_index == n) {
          load[num_y + j] = -(cpu ? evict_vars[j].cpu : evict_vars[j].ram);
        }
      }
      problem.constraints.push_back(
          {load, thresholds.hard() * cap - used + kTolerance * cap});

      const double big_m = used + (cpu ? total_cpu_demand : total_ram_demand);
      for (std::size_t r = 0; r < requests.size(); ++r) {
        if (requests[r].kind != InstanceKind::kSpot) continue;
        std::vector<double> gated = load;
        gated[y(r, n)] += big_m;
        problem.constraints.push_back(
            {std::move(gated),
             thresholds.soft() * cap - used + big_m + kTolerance * cap});
      }
    }
  }

  for (std::size_t j = 0; j + 1 < evict_vars.size(); ++j) {
    if (evict_vars[j].node_index != evict_vars[j + 1].node_index) continue;
    ilp::Constraint row{std::vector<double>(num_vars, 0.0), 0.0};
    row.coefficients[num_y + j + 1] = 1.0;
    row.coefficients[num_y + j] = -1.0;
    problem.constraints.push_back(std::move(row));
  }

  const ilp::Solution solution = ilp::solve(problem);
  if (solution.status != ilp::Status::kOptimal) {
    // All-zero with full reclamation is always feasible; reaching this means
    // the cluster state itself was inconsistent.
    throw std::logic_error("provisioning ILP reported infeasible");
  }
  for (std::size_t j = 0; j < evict_vars.size(); ++j) {
    if (solution.assignment[num_y + j]) {
      plan.evictions.push_back({evict_vars[j].node_id, evict_vars[j].request_id});
    }
  }
  for (std::size_t r = 0; r < requests.size(); ++r) {
    bool placed = false;
    for (std::size_t n = 0; n < num_nodes; ++n) {
      if (solution.assignment[y(r, n)]) {
        plan.placements.push_back({r, cluster[n].node_id});
        placed = true;
      }
    }
    if (!placed) plan.rejected.push_back(r);
  }
  return plan;
}

Simulator::Simulator(SimulationConfig config, std::vector<InstanceRequest> trace)
    : config_(std::move(config)), trace_(std::move(trace)), rng_(config_.seed) {
  if (config_.nodes <= 0) throw std::invalid_argument("nodes must be positive");
  if (!(config_.cpu_capacity > 0.0) || !(config_.ram_capacity > 0.0)) {
    throw std::invalid_argument("node capacities must be positive");
  }
  for (std::size_t i = 0; i < trace_.size(); ++i) {
    trace_[i].validate();
    if (i > 0 && trace_[i].arrival_slot < trace_[i - 1].arrival_slot) {
      throw std::invalid_argument("trace must be sorted by arrival slot");
    }
  }
  for (int n = 0; n < config_.nodes; ++n) {
    cluster_.push_back({n, config_.cpu_capacity, config_.ram_capacity, {}});
  }
  if (config_.slots) {
    if (*config_.slots < 0) throw std::invalid_argument("slots must be >= 0");
    horizon_ = *config_.slots;
  } else {
    horizon_ = trace_.empty() ? 0 : trace_.back().arrival_slot + 1;
  }
}

void Simulator::retire_completed() {
  for (NodeState& node : cluster_) {
    auto done = [this](const InstanceState& i) {
      return i.request.lifetime && i.start_slot + *i.request.lifetime <= slot_;
    };
    for (InstanceState& i : node.running) {
      if (done(i)) {
        i.status = InstanceStatus::kCompleted;
        departed_.push_back(i);
      }
    }
    std::erase_if(node.running, done);
  }
}

void Simulator::resample_workloads() {
  const auto draw = [this](double mean) {
    std::poisson_distribution<std::int64_t> poisson(mean);
    return static_cast<double>(poisson(rng_));
  };
  for (NodeState& node : cluster_) {
    // On-demand load may use everything up to the hard threshold; spot load
    // is only bounded by physical capacity and left to the hard sweep.
    double cpu = 0.0;
    double ram = 0.0;
    const double od_cpu_cap = config_.thresholds.hard() * node.cpu_capacity;
    const double od_ram_cap = config_.thresholds.hard() * node.ram_capacity;
    for (InstanceState& i : node.running) {
      if (i.is_spot()) continue;
      i.cpu_workload = std::min(draw(i.request.cpu_demand), std::max(0.0, od_cpu_cap - cpu));
      i.ram_workload = std::min(draw(i.request.ram_demand), std::max(0.0, od_ram_cap - ram));
      cpu += i.cpu_workload;
      ram += i.ram_workload;
    }
    for (InstanceState& i : node.running) {
      if (!i.is_spot()) continue;
      i.cpu_workload =
          std::min(draw(i.request.cpu_demand), std::max(0.0, node.cpu_capacity - cpu));
      i.ram_workload =
          std::min(draw(i.request.ram_demand), std::max(0.0, node.ram_capacity - ram));
      cpu += i.cpu_workload;
      ram += i.ram_workload;
    }
  }
}

std::size_t Simulator::spot_admission_capacity(
    std::span<const InstanceRequest> ranked) const {
  std::vector<WorkingNode> nodes = working_copy(cluster_);
  const double soft = config_.thresholds.soft() + kTolerance;
  std::size_t admitted = 0;
  for (const InstanceRequest& req : ranked) {
    WorkingNode* node = least_utilized(nodes, [&](const WorkingNode& n) {
      return n.utilization_with(req.cpu_demand, req.ram_demand) <= soft;
    });
    if (node == nullptr) break;
    node->cpu += req.cpu_demand;
    node->ram += req.ram_demand;
    ++admitted;
  }
  return admitted;
}

void Simulator::evict(NodeState& node, std::int64_t request_id) {
  const auto it = std::find_if(
      node.running.begin(), node.running.end(),
      [&](const InstanceState& i) { return i.request.request_id == request_id; });
  if (it == node.running.end() || !it->is_spot()) {
    throw std::logic_error("eviction target is not a running spot instance");
  }
  it->status = InstanceStatus::kEvicted;
  departed_.push_back(*it);
  node.running.erase(it);
  ++evictions_this_slot_;
}

void Simulator::apply(const PlacementPlan& plan,
                      std::span<const InstanceRequest> requests) {
  for (const Eviction& e : plan.evictions) {
    evict(cluster_.at(static_cast<std::size_t>(e.node_id)), e.request_id);
  }
  for (const Placement& p : plan.placements) {
    const InstanceRequest& req = requests[p.request_index];
    InstanceState inst;
    inst.request = req;
    inst.node_id = p.node_id;
    inst.start_slot = slot_;
    inst.cpu_workload = req.cpu_demand;
    inst.ram_workload = req.ram_demand;
    cluster_.at(static_cast<std::size_t>(p.node_id)).running.push_back(inst);
  }
}

std::int64_t Simulator::sweep_hard_threshold() {
  const std::int64_t before = evictions_this_slot_;
  for (NodeState& node : cluster_) {
    while (node.utilization() > config_.thresholds.hard() + kTolerance) {
      const auto order = eviction_order(node);
      if (order.empty()) break;
      evict(node, order.front()->request.request_id);
    }
  }
  return evictions_this_slot_ - before;
}

std::optional<SlotRecord> Simulator::step() {
  if (slot_ >= horizon_) return std::nullopt;
  evictions_this_slot_ = 0;

  retire_completed();
  resample_workloads();

  std::vector<InstanceRequest> arrivals;
  while (next_request_ < trace_.size() &&
         trace_[next_request_].arrival_slot <= slot_) {
    arrivals.push_back(trace_[next_request_++]);
  }

  const PricingPolicy& pricing = config_.pricing;
  std::vector<InstanceRequest> to_provision;
  std::int64_t rejections = 0;
  for (const InstanceRequest& r : arrivals) {
    if (r.kind == InstanceKind::kOnDemand) to_provision.push_back(r);
  }

  double spot_price = pricing.spot_floor();
  std::vector<InstanceRequest> spot_requests;
  for (const InstanceRequest& r : arrivals) {
    if (r.kind == InstanceKind::kSpot) spot_requests.push_back(r);
  }
  if (config_.algorithm == Algorithm::kNone) {
    rejections += static_cast<std::int64_t>(spot_requests.size());
  } else if (!spot_requests.empty()) {
    std::vector<double> bids;
    for (const InstanceRequest& r : spot_requests) bids.push_back(r.bid());
    // Rank eligible bids the way the auction does, then see how many fit
    // under the soft threshold.
    const AuctionResult ranking =
        clear_spot_price(bids, spot_requests.size(), pricing.spot_floor());
    std::vector<InstanceRequest> ranked;
    for (std::size_t i : ranking.admitted) ranked.push_back(spot_requests[i]);
    const std::size_t capacity = spot_admission_capacity(ranked);

    const AuctionResult auction =
        clear_spot_price(bids, capacity, pricing.spot_floor());
    if (pricing.mode() == SpotPricingMode::kAuction) spot_price = auction.price;
    for (std::size_t i : auction.admitted) to_provision.push_back(spot_requests[i]);
    rejections += static_cast<std::int64_t>(spot_requests.size() -
                                            auction.admitted.size());
  }

  PlacementPlan plan;
  if (config_.algorithm == Algorithm::kIlp) {
    plan = ilp_provision(to_provision, cluster_, config_.thresholds, pricing,
                         spot_price);
  } else {
    plan = heuristic_provision(to_provision, cluster_, config_.thresholds,
                               pricing);
  }
  apply(plan, to_provision);
  rejections += static_cast<std::int64_t>(plan.rejected.size());
  sweep_hard_threshold();

  SlotRecord rec;
  rec.slot = slot_;
  for (const NodeState& node : cluster_) {
    rec.node_cpu.push_back(node.cpu_fraction());
    rec.node_ram.push_back(node.ram_fraction());
    rec.node_utilization.push_back(node.utilization());
    for (const InstanceState& i : node.running) {
      if (i.is_spot()) {
        ++rec.spot_running;
      } else {
        ++rec.on_demand_running;
      }
    }
  }
  const double n = static_cast<double>(cluster_.size());
  rec.avg_cpu = std::accumulate(rec.node_cpu.begin(), rec.node_cpu.end(), 0.0) / n;
  rec.avg_ram = std::accumulate(rec.node_ram.begin(), rec.node_ram.end(), 0.0) / n;
  rec.spot_price = spot_price;
  rec.revenue = static_cast<double>(rec.on_demand_running) * pricing.on_demand_price() +
                static_cast<double>(rec.spot_running) * spot_price;
  cumulative_revenue_ += rec.revenue;
  rec.cumulative_revenue = cumulative_revenue_;
  rec.evictions = evictions_this_slot_;
  rec.rejections = rejections;
  ++slot_;
  return rec;
}

std::vector<SlotRecord> run(const SimulationConfig& config,
                            std::vector<InstanceRequest> trace) {
  Simulator sim(config, std::move(trace));
  std::vector<SlotRecord> records;
  while (auto rec = sim.step()) records.push_back(std::move(*rec));
  if (config.output_path) {
    std::ofstream out(*config.output_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + *config.output_path);
    write_records_csv(out, records);
    if (!out) throw std::runtime_error("failed writing " + *config.output_path);
  }
  return records;
}

}  // namespace spotmarket::sim

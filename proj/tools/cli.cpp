#include "cli.hpp"

#include <fmt/format.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>

#include "spotmarket/equilibrium.hpp"
#include "spotmarket/ilp_solver.hpp"
#include "spotmarket/market_model.hpp"
#include "spotmarket/simulator.hpp"
#include "spotmarket/trace_io.hpp"

namespace spotmarket::cli {
namespace {

struct ParamFlags {
  double qo = 0.0;
  double qs = 0.0;
  double go = 0.0;
  double gs = 0.0;
};

void add_param_flags(CLI::App* cmd, ParamFlags& flags, bool required) {
  auto* qo = cmd->add_option("--qo", flags.qo, "On-demand QoS level");
  auto* qs = cmd->add_option("--qs", flags.qs, "Spot QoS level (below --qo)");
  auto* go = cmd->add_option("--go", flags.go, "Average on-demand utilization");
  auto* gs = cmd->add_option("--gs", flags.gs, "Average spot utilization");
  if (required) {
    for (auto* opt : {qo, qs, go, gs}) opt->required();
  }
}

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

MarketParams make_params(const ParamFlags& f) {
  try {
    return MarketParams(f.qo, f.qs, f.go, f.gs);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

// Writes through `body` to `path`, or to `fallback` when no path is given.
template <typename Body>
void emit(const std::optional<std::string>& path, std::ostream& fallback,
          Body&& body) {
  if (!path) {
    body(fallback);
    return;
  }
  std::ofstream file(*path, std::ios::binary);
  if (!file) throw DataError("cannot open " + *path + " for writing");
  body(file);
  if (!file) throw DataError("failed writing " + *path);
}

std::string table_number(double v) { return fmt::format("{:.6g}", v); }

// --- equilibrium -----------------------------------------------------------

constexpr const char* kEquilibriumHeader =
    "qo,qs,gamma_o,gamma_s,p_o,p_s,share_o,share_s,boundary_none_spot,"
    "boundary_spot_od,rev_o,rev_s,rev_total,agg_u_o,agg_u_s,agg_u_total,"
    "baseline_price,baseline_share,rev_baseline,agg_u_baseline";

int equilibrium_command(const ParamFlags& flags,
                        const std::optional<std::string>& output,
                        std::ostream& out, std::ostream& err) {
  const MarketParams params = make_params(flags);
  const ViabilityReport c1 = diagnose_c1(params);
  if (!has_unique_equilibrium(params)) {
    err << "no unique equilibrium: "
        << (c1.holds() ? "equilibrium denominator is degenerate" : c1.failure())
        << '\n';
    return kNotViable;
  }
  const EquilibriumOutcome eq = equilibrium(params);
  const ShareBoundaries b = equilibrium_share_boundaries(params);
  const BaselineOutcome base = on_demand_only_equilibrium(params);
  const double base_utility = on_demand_only_aggregate_utility(params);
  const double share_o = eq.shares.on_demand.length();
  const double share_s = eq.shares.spot.length();

  const std::pair<const char*, double> rows[] = {
      {"on-demand price", eq.prices.on_demand},
      {"spot price", eq.prices.spot},
      {"on-demand share", share_o},
      {"spot share", share_s},
      {"none/spot boundary", b.none_spot},
      {"spot/on-demand boundary", b.spot_on_demand},
      {"on-demand revenue", eq.revenue.on_demand},
      {"spot revenue", eq.revenue.spot},
      {"total revenue", eq.revenue.total},
      {"on-demand aggregate utility", eq.utilities.on_demand},
      {"spot aggregate utility", eq.utilities.spot},
      {"total aggregate utility", eq.utilities.total()},
      {"baseline price", base.price},
      {"baseline share", base.share_length},
      {"baseline revenue", base.revenue},
      {"baseline aggregate utility", base_utility},
      {"price delta", eq.prices.on_demand - base.price},
      {"served share delta", share_o + share_s - base.share_length},
      {"revenue delta", eq.revenue.total - base.revenue},
      {"aggregate utility delta", eq.utilities.total() - base_utility},
  };
  for (const auto& [label, value] : rows) {
    out << fmt::format("{:<28} {:>12}\n", label, table_number(value));
  }

  if (output) {
    emit(output, out, [&](std::ostream& csv) {
      csv << kEquilibriumHeader << '\n'
          << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                         params.qos_on_demand(), params.qos_spot(),
                         params.util_on_demand(), params.util_spot(),
                         eq.prices.on_demand, eq.prices.spot, share_o, share_s,
                         b.none_spot, b.spot_on_demand, eq.revenue.on_demand,
                         eq.revenue.spot, eq.revenue.total, eq.utilities.on_demand,
                         eq.utilities.spot, eq.utilities.total(), base.price,
                         base.share_length, base.revenue, base_utility);
    });
  }
  return kSuccess;
}

// --- simulate --------------------------------------------------------------

struct SimulateFlags {
  std::string config;
  std::string trace;
  std::optional<std::string> output;
  std::optional<std::string> algorithm;
  std::optional<std::uint64_t> seed;
  bool derive_floor = false;
  ParamFlags market;
};

int simulate_command(const SimulateFlags& flags, std::ostream& out,
                     std::ostream& err) {
  sim::SimulationConfig config;
  std::vector<sim::InstanceRequest> trace;
  try {
    config = sim::load_config(flags.config);
    trace = sim::load_trace(flags.trace);
  } catch (const sim::ParseError& e) {
    err << e.what() << '\n';
    return kDataError;
  }
  if (flags.algorithm) {
    if (*flags.algorithm == "heuristic") {
      config.algorithm = sim::Algorithm::kHeuristic;
    } else if (*flags.algorithm == "ilp") {
      config.algorithm = sim::Algorithm::kIlp;
    } else if (*flags.algorithm == "none") {
      config.algorithm = sim::Algorithm::kNone;
    } else {
      throw UsageError("--algorithm must be heuristic, ilp or none");
    }
  }
  if (flags.seed) config.seed = *flags.seed;
  if (flags.derive_floor) {
    const MarketParams params = make_params(flags.market);
    if (!has_unique_equilibrium(params)) {
      err << "cannot derive spot floor: " << diagnose_c1(params).failure() << '\n';
      return kNotViable;
    }
    const PriceVector p = equilibrium(params).prices;
    const double od = config.pricing.on_demand_price();
    config.pricing = sim::PricingPolicy(od, od * p.spot / p.on_demand,
                                        config.pricing.mode());
  }

  std::vector<sim::SlotRecord> records;
  try {
    records = sim::run(config, std::move(trace));
  } catch (const ilp::ProblemTooLarge& e) {
    err << "simulation aborted: " << e.what() << '\n';
    return kDataError;
  } catch (const std::invalid_argument& e) {
    err << "invalid simulation input: " << e.what() << '\n';
    return kDataError;
  }
  emit(flags.output, out,
       [&](std::ostream& csv) { sim::write_records_csv(csv, records); });

  double cpu = 0.0;
  double ram = 0.0;
  double peak = 0.0;
  std::int64_t evictions = 0;
  std::int64_t rejections = 0;
  for (const sim::SlotRecord& r : records) {
    cpu += r.avg_cpu;
    ram += r.avg_ram;
    evictions += r.evictions;
    rejections += r.rejections;
    for (double u : r.node_utilization) peak = std::max(peak, u);
  }
  const double n = records.empty() ? 1.0 : static_cast<double>(records.size());
  // The CSV owns stdout when no output file was given.
  std::ostream& summary = flags.output ? out : err;
  summary << fmt::format("{:<28} {:>12}\n", "algorithm",
                         sim::to_string(config.algorithm))
          << fmt::format("{:<28} {:>12}\n", "slots", records.size())
          << fmt::format("{:<28} {:>12}\n", "spot floor",
                         table_number(config.pricing.spot_floor()))
          << fmt::format("{:<28} {:>12}\n", "cumulative revenue",
                         table_number(records.empty()
                                          ? 0.0
                                          : records.back().cumulative_revenue))
          << fmt::format("{:<28} {:>12}\n", "mean cpu utilization",
                         table_number(cpu / n))
          << fmt::format("{:<28} {:>12}\n", "mean ram utilization",
                         table_number(ram / n))
          << fmt::format("{:<28} {:>12}\n", "peak node utilization",
                         table_number(peak))
          << fmt::format("{:<28} {:>12}\n", "evictions", evictions)
          << fmt::format("{:<28} {:>12}\n", "rejections", rejections);
  return kSuccess;
}

// --- verify ----------------------------------------------------------------

int verify_command(std::uint64_t seed, std::size_t draws, std::ostream& out,
                   const Hooks& hooks) {
  if (draws == 0) throw UsageError("--draws must be at least 1");
  VerificationOptions options;
  options.seed = seed;
  options.draws = draws;
  const VerificationReport report =
      run_property_suite(options, hooks.verify_solver);
  for (const PropertyResult& p : report.properties) {
    const std::size_t total = p.passed + p.failed;
    if (p.failed == 0) {
      out << fmt::format("PASS  {} ({}/{})\n", p.name, p.passed, total);
    } else {
      out << fmt::format("FAIL  {} ({} of {} failed)\n", p.name, p.failed, total)
          << "      counterexample: " << p.first_counterexample << '\n';
    }
  }
  out << fmt::format("{} passed, {} failed\n", report.passed(), report.failed());
  return report.ok() ? kSuccess : kVerificationFailed;
}

}  // namespace

std::vector<double> sweep_values(const SweepSpec& spec) {
  if (spec.variable != "qs" && spec.variable != "gs") {
    throw std::invalid_argument("swept variable must be qs or gs");
  }
  if (!(spec.step > 0.0) || !std::isfinite(spec.step)) {
    throw std::invalid_argument("sweep step must be positive");
  }
  if (!(spec.stop >= spec.start)) throw std::invalid_argument("sweep range is empty");
  const auto count = static_cast<std::size_t>(
      std::floor((spec.stop - spec.start) / spec.step + 1e-9)) + 1;
  std::vector<double> values;
  for (std::size_t i = 0; i < count; ++i) {
    // Snap to 12 digits so 0.1 + 0.05 comes out as 0.15, not 0.15000000000000002.
    const double v =
        std::stod(fmt::format("{:.12g}", spec.start + static_cast<double>(i) * spec.step));
    if (spec.variable == "qs" && !(v > 0.0 && v < spec.qos_on_demand)) {
      throw std::invalid_argument(
          fmt::format("swept qs={} outside (0, qo={})", v, spec.qos_on_demand));
    }
    if (spec.variable == "gs" && !(v > 0.0)) {
      throw std::invalid_argument(fmt::format("swept gs={} must be positive", v));
    }
    values.push_back(v);
  }
  return values;
}

void write_sweep_csv(std::ostream& out, const SweepSpec& spec) {
  const std::vector<double> values = sweep_values(spec);
  out << kSweepHeader << '\n';
  for (double v : values) {
    const bool qs = spec.variable == "qs";
    const MarketParams params(spec.qos_on_demand, qs ? v : spec.qos_spot,
                              spec.util_on_demand, qs ? spec.util_spot : v);
    const BaselineOutcome base = on_demand_only_equilibrium(params);
    const double base_utility = on_demand_only_aggregate_utility(params);
    if (!has_unique_equilibrium(params)) {
      out << fmt::format("{},false,,,,,,,,{},,,,{}\n", v, base.revenue,
                         base_utility);
      continue;
    }
    const EquilibriumOutcome eq = equilibrium(params);
    out << fmt::format("{},true,{},{},{},{},{},{},{},{},{},{},{},{}\n", v,
                       eq.prices.on_demand, eq.prices.spot,
                       eq.shares.on_demand.length(), eq.shares.spot.length(),
                       eq.revenue.on_demand, eq.revenue.spot, eq.revenue.total,
                       base.revenue, eq.utilities.on_demand, eq.utilities.spot,
                       eq.utilities.total(), base_utility);
  }
}

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err, const Hooks& hooks) {
  CLI::App app{"Spot and on-demand cloud market equilibria and cluster simulation",
               "spotmarket"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "spotmarket 0.1.0");

  ParamFlags eq_flags;
  std::optional<std::string> eq_output;
  auto* eq_cmd = app.add_subcommand("equilibrium", "Equilibrium prices and shares");
  add_param_flags(eq_cmd, eq_flags, true);
  eq_cmd->add_option("--output", eq_output, "Also write a CSV row here");

  SweepSpec sweep;
  std::optional<std::string> sweep_output;
  auto* sweep_cmd = app.add_subcommand("sweep", "Equilibrium over a parameter range");
  sweep_cmd->add_option("--var", sweep.variable, "Swept parameter")
      ->check(CLI::IsMember({"qs", "gs"}))
      ->capture_default_str();
  sweep_cmd->add_option("--start", sweep.start)->required();
  sweep_cmd->add_option("--stop", sweep.stop)->required();
  sweep_cmd->add_option("--step", sweep.step)->required();
  sweep_cmd->add_option("--qo", sweep.qos_on_demand, "On-demand QoS level")
      ->capture_default_str();
  sweep_cmd->add_option("--qs", sweep.qos_spot, "Spot QoS when not swept")
      ->capture_default_str();
  sweep_cmd->add_option("--go", sweep.util_on_demand, "On-demand utilization")
      ->capture_default_str();
  sweep_cmd->add_option("--gs", sweep.util_spot, "Spot utilization when not swept")
      ->capture_default_str();
  sweep_cmd->add_option("--output", sweep_output, "CSV path (default stdout)");

  SimulateFlags sim_flags;
  auto* sim_cmd = app.add_subcommand("simulate", "Run the cluster simulator");
  sim_cmd->add_option("--config", sim_flags.config, "Config file")->required();
  sim_cmd->add_option("--trace", sim_flags.trace, "Request trace CSV")->required();
  sim_cmd->add_option("--output", sim_flags.output, "CSV path (default stdout)");
  sim_cmd->add_option("--algorithm", sim_flags.algorithm,
                      "Override the configured algorithm");
  sim_cmd->add_option("--seed", sim_flags.seed, "Override the configured seed");
  auto* derive = sim_cmd->add_flag(
      "--derive-floor", sim_flags.derive_floor,
      "Set the spot floor to p_o * (p_s*/p_o*) from the equilibrium at --qo/--qs/--go/--gs");
  add_param_flags(sim_cmd, sim_flags.market, false);
  for (const char* name : {"--qo", "--qs", "--go", "--gs"}) {
    sim_cmd->get_option(name)->needs(derive);
    derive->needs(sim_cmd->get_option(name));
  }

  std::uint64_t verify_seed = 7;
  std::size_t verify_draws = 200;
  auto* verify_cmd = app.add_subcommand("verify", "Run the property suite");
  verify_cmd->add_option("--seed", verify_seed)->capture_default_str();
  verify_cmd->add_option("--draws", verify_draws)->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::CallForVersion&) {
    out << "spotmarket 0.1.0\n";
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kUsage;
  }

  try {
    if (*eq_cmd) return equilibrium_command(eq_flags, eq_output, out, err);
    if (*sweep_cmd) {
      // Validate before touching the output file.
      try {
        sweep_values(sweep);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      emit(sweep_output, out, [&](std::ostream& csv) { write_sweep_csv(csv, sweep); });
      return kSuccess;
    }
    if (*sim_cmd) return simulate_command(sim_flags, out, err);
    if (*verify_cmd) return verify_command(verify_seed, verify_draws, out, hooks);
  } catch (const UsageError& e) {
    err << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    err << e.what() << '\n';
    return kDataError;
  }
  return kUsage;
}

}  // namespace spotmarket::cli

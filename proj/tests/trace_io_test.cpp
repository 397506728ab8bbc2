#include "spotmarket/trace_io.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

namespace spotmarket::sim {
namespace {

std::vector<InstanceRequest> parse(const std::string& text) {
  std::istringstream in(text);
  return parse_trace(in, "t.csv");
}

SimulationConfig parse_conf(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, "c.conf");
}

// Returns the ParseError message, or "" if parsing succeeded.
template <typename F>
std::string error_of(F&& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

TEST(ParseTraceTest, ReadsRows) {
  const auto trace = parse(
      "slot,kind,cpu,ram,bid,lifetime\n"
      "0,od,10,5.5,,\n"
      "0,spot,4,4,3.25,6\n"
      "2,od,1,1,,2\n");
  ASSERT_EQ(trace.size(), 3u);
  EXPECT_EQ(trace[0].kind, InstanceKind::kOnDemand);
  EXPECT_EQ(trace[0].ram_demand, 5.5);
  EXPECT_FALSE(trace[0].max_bid);
  EXPECT_FALSE(trace[0].lifetime);
  EXPECT_EQ(trace[1].kind, InstanceKind::kSpot);
  EXPECT_EQ(*trace[1].max_bid, 3.25);
  EXPECT_EQ(*trace[1].lifetime, 6);
  EXPECT_EQ(trace[2].arrival_slot, 2);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    EXPECT_EQ(trace[i].request_id, static_cast<std::int64_t>(i));
  }
}

TEST(ParseTraceTest, HeaderOnlyIsEmpty) {
  EXPECT_TRUE(parse("slot,kind,cpu,ram,bid,lifetime\n").empty());
}

TEST(ParseTraceTest, ErrorsCarryLineNumbers) {
  const std::string header = "slot,kind,cpu,ram,bid,lifetime\n";
  EXPECT_EQ(error_of([] { parse("slot,kind\n"); }).rfind("t.csv:1:", 0), 0u);
  EXPECT_EQ(error_of([&] { parse(header + "0,od,1,1,,\n0,vm,1,1,,\n"); }).rfind("t.csv:3:", 0),
            0u);
  EXPECT_EQ(error_of([&] { parse(header + "0,od,1,1\n"); }).rfind("t.csv:2:", 0), 0u);
  EXPECT_EQ(error_of([&] { parse(header + "0,od,x,1,,\n"); }).rfind("t.csv:2:", 0), 0u);
  EXPECT_EQ(error_of([&] { parse(header + "0,od,1,1,4,\n"); }).rfind("t.csv:2:", 0), 0u);
  EXPECT_EQ(error_of([&] { parse(header + "0,spot,1,1,,\n"); }).rfind("t.csv:2:", 0), 0u);
  EXPECT_EQ(error_of([&] { parse(header + "0,od,0,1,,\n"); }).rfind("t.csv:2:", 0), 0u);
  EXPECT_EQ(error_of([&] { parse(header + "0,od,1,1,,0\n"); }).rfind("t.csv:2:", 0), 0u);
  EXPECT_EQ(error_of([&] { parse(header + "3,od,1,1,,\n1,od,1,1,,\n"); }).rfind("t.csv:3:", 0),
            0u);
  EXPECT_EQ(error_of([&] { parse(header + "-1,od,1,1,,\n"); }).rfind("t.csv:2:", 0), 0u);
}

TEST(ParseTraceTest, MissingFile) {
  EXPECT_THROW(load_trace("/nonexistent/trace.csv"), ParseError);
}

const char* const kConfig =
    "# cluster\n"
    "nodes = 2\n"
    "cpu_capacity = 64\n"
    "ram_capacity 128\n"
    "th_soft = 0.4\n"
    "th_hard = 0.8\n"
    "on_demand_price = 12  # per slot\n"
    "spot_floor = 2.5\n"
    "algorithm = ilp\n"
    "seed = 9\n";

TEST(ParseConfigTest, ReadsKeys) {
  const SimulationConfig c = parse_conf(kConfig);
  EXPECT_EQ(c.nodes, 2);
  EXPECT_EQ(c.cpu_capacity, 64.0);
  EXPECT_EQ(c.ram_capacity, 128.0);
  EXPECT_EQ(c.thresholds.soft(), 0.4);
  EXPECT_EQ(c.thresholds.hard(), 0.8);
  EXPECT_EQ(c.pricing.on_demand_price(), 12.0);
  EXPECT_EQ(c.pricing.spot_floor(), 2.5);
  EXPECT_EQ(c.pricing.mode(), SpotPricingMode::kAuction);
  EXPECT_EQ(c.algorithm, Algorithm::kIlp);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_FALSE(c.slots);
}

TEST(ParseConfigTest, OptionalKeys) {
  const SimulationConfig c =
      parse_conf(std::string(kConfig) + "slots = 30\nspot_pricing = fixed\n");
  EXPECT_EQ(*c.slots, 30);
  EXPECT_EQ(c.pricing.mode(), SpotPricingMode::kFixedFloor);
}

TEST(ParseConfigTest, Errors) {
  const std::string base(kConfig);
  std::string without_seed = base.substr(0, base.find("seed"));
  const std::string missing = error_of([&] { parse_conf(without_seed); });
  EXPECT_NE(missing.find("missing key 'seed'"), std::string::npos) << missing;

  EXPECT_EQ(error_of([&] { parse_conf(base + "colour = red\n"); }).rfind("c.conf:11:", 0), 0u);
  EXPECT_EQ(error_of([&] { parse_conf(base + "seed = 3\n"); }).rfind("c.conf:11:", 0), 0u);
  EXPECT_EQ(error_of([&] { parse_conf(base + "slots = many\n"); }).rfind("c.conf:11:", 0), 0u);
  EXPECT_EQ(error_of([&] { parse_conf(base + "spot_pricing = vickrey\n"); }).rfind("c.conf:11:", 0),
            0u);
  const std::string bad_algorithm = error_of([&] {
    std::string text = base;
    text.replace(text.find("ilp"), 3, "fifo");
    parse_conf(text);
  });
  EXPECT_EQ(bad_algorithm.rfind("c.conf:9:", 0), 0u) << bad_algorithm;
  // Policy validation problems still surface as parse errors.
  const std::string inverted = error_of([&] {
    std::string text = base;
    text.replace(text.find("0.4"), 3, "0.9");
    parse_conf(text);
  });
  EXPECT_FALSE(inverted.empty());
}

TEST(TraceRoundTripPropertyTest, WriteThenParse) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> amount(0.001, 500.0);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<InstanceRequest> trace;
    std::int64_t slot = 0;
    for (int i = 0; i < 20; ++i) {
      slot += coin(rng);
      InstanceRequest r;
      r.request_id = i;
      r.arrival_slot = slot;
      r.kind = coin(rng) ? InstanceKind::kSpot : InstanceKind::kOnDemand;
      r.cpu_demand = amount(rng);
      r.ram_demand = amount(rng);
      if (r.kind == InstanceKind::kSpot) r.max_bid = amount(rng) / 50.0;
      if (coin(rng)) r.lifetime = 1 + i;
      trace.push_back(r);
    }
    std::ostringstream out;
    write_trace_csv(out, trace);
    const auto back = parse(out.str());
    ASSERT_EQ(back.size(), trace.size());
    for (std::size_t i = 0; i < trace.size(); ++i) {
      EXPECT_EQ(back[i].request_id, trace[i].request_id);
      EXPECT_EQ(back[i].arrival_slot, trace[i].arrival_slot);
      EXPECT_EQ(back[i].kind, trace[i].kind);
      EXPECT_EQ(back[i].cpu_demand, trace[i].cpu_demand);
      EXPECT_EQ(back[i].ram_demand, trace[i].ram_demand);
      EXPECT_EQ(back[i].max_bid, trace[i].max_bid);
      EXPECT_EQ(back[i].lifetime, trace[i].lifetime);
    }
  }
}

TEST(WriteRecordsTest, HeaderAndColumns) {
  SlotRecord r;
  r.slot = 4;
  r.avg_cpu = 0.125;
  r.avg_ram = 0.5;
  r.spot_price = 3;
  r.revenue = 23;
  r.cumulative_revenue = 99.5;
  r.evictions = 1;
  r.rejections = 2;
  std::ostringstream out;
  write_records_csv(out, {r});
  EXPECT_EQ(out.str(), std::string(kRecordHeader) + "\n4,0.125,0.5,3,23,99.5,1,2\n");
}

}  // namespace
}  // namespace spotmarket::sim

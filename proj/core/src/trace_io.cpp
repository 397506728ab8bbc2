#include "spotmarket/trace_io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string_view>

namespace spotmarket::sim {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

// from_chars for double is available in libstdc++ 11.
template <typename T>
bool parse_number(std::string_view text, T& out) {
  if (text.empty()) return false;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

class LineError {
 public:
  LineError(const std::string& source, std::size_t line)
      : source_(source), line_(line) {}
  [[noreturn]] void operator()(const std::string& message) const {
    throw ParseError(source_, line_, message);
  }

 private:
  const std::string& source_;
  std::size_t line_;
};

std::ifstream open(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, 0, "cannot open file");
  return in;
}

}  // namespace

ParseError::ParseError(const std::string& source, std::size_t line,
                       const std::string& message)
    : std::runtime_error(line == 0
                             ? fmt::format("{}: {}", source, message)
                             : fmt::format("{}:{}: {}", source, line, message)),
      line_(line) {}

std::vector<InstanceRequest> parse_trace(std::istream& in,
                                         const std::string& source) {
  std::vector<InstanceRequest> trace;
  std::string raw;
  std::size_t line_no = 0;
  bool seen_header = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const LineError fail(source, line_no);
    if (!seen_header) {
      if (line != kTraceHeader) {
        fail(fmt::format("expected header '{}'", kTraceHeader));
      }
      seen_header = true;
      continue;
    }
    const auto f = split_csv(line);
    if (f.size() != 6) fail(fmt::format("expected 6 fields, found {}", f.size()));

    InstanceRequest req;
    req.request_id = static_cast<std::int64_t>(trace.size());
    if (!parse_number(f[0], req.arrival_slot) || req.arrival_slot < 0) {
      fail(fmt::format("bad slot '{}'", f[0]));
    }
    if (f[1] == "od") {
      req.kind = InstanceKind::kOnDemand;
    } else if (f[1] == "spot") {
      req.kind = InstanceKind::kSpot;
    } else {
      fail(fmt::format("bad kind '{}' (expected od or spot)", f[1]));
    }
    if (!parse_number(f[2], req.cpu_demand) || !(req.cpu_demand > 0.0)) {
      fail(fmt::format("bad cpu '{}'", f[2]));
    }
    if (!parse_number(f[3], req.ram_demand) || !(req.ram_demand > 0.0)) {
      fail(fmt::format("bad ram '{}'", f[3]));
    }
    if (req.kind == InstanceKind::kSpot) {
      double bid = 0.0;
      if (!parse_number(f[4], bid) || !(bid >= 0.0)) {
        fail(fmt::format("spot request needs a non-negative bid, got '{}'", f[4]));
      }
      req.max_bid = bid;
    } else if (!f[4].empty()) {
      fail("on-demand request must leave bid empty");
    }
    if (!f[5].empty()) {
      std::int64_t lifetime = 0;
      if (!parse_number(f[5], lifetime) || lifetime <= 0) {
        fail(fmt::format("bad lifetime '{}'", f[5]));
      }
      req.lifetime = lifetime;
    }
    if (!trace.empty() && req.arrival_slot < trace.back().arrival_slot) {
      fail("rows must be sorted by slot");
    }
    trace.push_back(req);
  }
  if (!seen_header) throw ParseError(source, 0, "missing header line");
  return trace;
}

std::vector<InstanceRequest> load_trace(const std::string& path) {
  std::ifstream in = open(path);
  return parse_trace(in, path);
}

SimulationConfig parse_config(std::istream& in, const std::string& source) {
  std::map<std::string, std::pair<std::string, std::size_t>> values;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const LineError fail(source, line_no);
    auto sep = line.find('=');
    if (sep == std::string_view::npos) sep = line.find_first_of(" \t");
    if (sep == std::string_view::npos) fail("expected 'key = value'");
    const std::string key(trim(line.substr(0, sep)));
    const std::string value(trim(line.substr(sep + 1)));
    if (key.empty() || value.empty()) fail("expected 'key = value'");
    if (!values.emplace(key, std::make_pair(value, line_no)).second) {
      fail(fmt::format("duplicate key '{}'", key));
    }
  }

  const auto take = [&](const std::string& key,
                        bool required) -> const std::pair<std::string, std::size_t>* {
    const auto it = values.find(key);
    if (it == values.end()) {
      if (required) throw ParseError(source, 0, fmt::format("missing key '{}'", key));
      return nullptr;
    }
    return &it->second;
  };
  const auto number = [&](const std::string& key) {
    const auto* v = take(key, true);
    double out = 0.0;
    if (!parse_number(std::string_view(v->first), out)) {
      throw ParseError(source, v->second,
                       fmt::format("key '{}': bad number '{}'", key, v->first));
    }
    return out;
  };
  const auto integer = [&](const std::string& key, bool required,
                           std::int64_t& out) {
    const auto* v = take(key, required);
    if (v == nullptr) return false;
    if (!parse_number(std::string_view(v->first), out)) {
      throw ParseError(source, v->second,
                       fmt::format("key '{}': bad integer '{}'", key, v->first));
    }
    return true;
  };

  for (const auto& [key, value] : values) {
    static const char* const kKnown[] = {
        "nodes",           "cpu_capacity", "ram_capacity", "th_soft",
        "th_hard",         "on_demand_price", "spot_floor", "algorithm",
        "seed",            "slots",        "spot_pricing"};
    if (std::find(std::begin(kKnown), std::end(kKnown), key) == std::end(kKnown)) {
      throw ParseError(source, value.second, fmt::format("unknown key '{}'", key));
    }
  }

  SimulationConfig config;
  std::int64_t nodes = 0;
  integer("nodes", true, nodes);
  if (nodes <= 0 || nodes > 1024) {
    throw ParseError(source, values["nodes"].second, "nodes must be in 1..1024");
  }
  config.nodes = static_cast<int>(nodes);
  config.cpu_capacity = number("cpu_capacity");
  config.ram_capacity = number("ram_capacity");
  if (!(config.cpu_capacity > 0.0) || !(config.ram_capacity > 0.0)) {
    throw ParseError(source, values["cpu_capacity"].second,
                     "capacities must be positive");
  }
  const double soft = number("th_soft");
  const double hard = number("th_hard");
  try {
    config.thresholds = ThresholdPolicy(soft, hard);
  } catch (const std::invalid_argument& e) {
    throw ParseError(source, values["th_soft"].second, e.what());
  }

  SpotPricingMode mode = SpotPricingMode::kAuction;
  if (const auto* v = take("spot_pricing", false)) {
    if (v->first == "auction") {
      mode = SpotPricingMode::kAuction;
    } else if (v->first == "fixed") {
      mode = SpotPricingMode::kFixedFloor;
    } else {
      throw ParseError(source, v->second,
                       fmt::format("spot_pricing must be auction or fixed, got '{}'",
                                   v->first));
    }
  }
  const double od_price = number("on_demand_price");
  const double floor = number("spot_floor");
  try {
    config.pricing = PricingPolicy(od_price, floor, mode);
  } catch (const std::invalid_argument& e) {
    throw ParseError(source, values["spot_floor"].second, e.what());
  }

  const auto* algo = take("algorithm", true);
  if (algo->first == "heuristic") {
    config.algorithm = Algorithm::kHeuristic;
  } else if (algo->first == "ilp") {
    config.algorithm = Algorithm::kIlp;
  } else if (algo->first == "none") {
    config.algorithm = Algorithm::kNone;
  } else {
    throw ParseError(source, algo->second,
                     fmt::format("algorithm must be heuristic, ilp or none, got '{}'",
                                 algo->first));
  }

  const auto* seed = take("seed", true);
  std::uint64_t seed_value = 0;
  if (!parse_number(std::string_view(seed->first), seed_value)) {
    throw ParseError(source, seed->second,
                     fmt::format("bad seed '{}'", seed->first));
  }
  config.seed = seed_value;

  std::int64_t slots = 0;
  if (integer("slots", false, slots)) {
    if (slots < 0) throw ParseError(source, values["slots"].second, "slots must be >= 0");
    config.slots = slots;
  }
  return config;
}

SimulationConfig load_config(const std::string& path) {
  std::ifstream in = open(path);
  return parse_config(in, path);
}

void write_records_csv(std::ostream& out, const std::vector<SlotRecord>& records) {
  out << kRecordHeader << '\n';
  for (const SlotRecord& r : records) {
    out << fmt::format("{},{},{},{},{},{},{},{}\n", r.slot, r.avg_cpu, r.avg_ram,
                       r.spot_price, r.revenue, r.cumulative_revenue, r.evictions,
                       r.rejections);
  }
}

void write_trace_csv(std::ostream& out, const std::vector<InstanceRequest>& trace) {
  out << kTraceHeader << '\n';
  for (const InstanceRequest& r : trace) {
    const bool spot = r.kind == InstanceKind::kSpot;
    out << fmt::format("{},{},{},{},{},{}\n", r.arrival_slot, spot ? "spot" : "od",
                       r.cpu_demand, r.ram_demand,
                       spot ? fmt::format("{}", r.bid()) : std::string(),
                       r.lifetime ? fmt::format("{}", *r.lifetime) : std::string());
  }
}

}  // namespace spotmarket::sim

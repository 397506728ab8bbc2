#ifndef SPOTMARKET_TRACE_IO_HPP_
#define SPOTMARKET_TRACE_IO_HPP_

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "spotmarket/simulator.hpp"

namespace spotmarket::sim {

// Malformed trace or config input. line() is 1-based; 0 when the problem is
// not tied to a line (e.g. a missing key).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line,
             const std::string& message);

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

inline constexpr const char* kTraceHeader = "slot,kind,cpu,ram,bid,lifetime";
inline constexpr const char* kRecordHeader =
    "slot,avg_cpu,avg_ram,spot_price,revenue,cum_revenue,evictions,rejections";

// CSV with header `slot,kind,cpu,ram,bid,lifetime`; kind is `od` or `spot`,
// bid is empty for od, an empty lifetime means open-ended. Request ids are
// assigned in file order. Rows must be sorted by slot.
std::vector<InstanceRequest> parse_trace(std::istream& in,
                                         const std::string& source = "trace");
std::vector<InstanceRequest> load_trace(const std::string& path);

// Flat `key = value` (or `key value`) lines; `#` starts a comment.
// Required: nodes, cpu_capacity, ram_capacity, th_soft, th_hard,
// on_demand_price, spot_floor, algorithm (heuristic|ilp|none), seed.
// Optional: slots, spot_pricing (auction|fixed).
SimulationConfig parse_config(std::istream& in,
                              const std::string& source = "config");
SimulationConfig load_config(const std::string& path);

// One row per slot under kRecordHeader, full round-trip precision.
void write_records_csv(std::ostream& out, const std::vector<SlotRecord>& records);
void write_trace_csv(std::ostream& out,
                     const std::vector<InstanceRequest>& trace);

}  // namespace spotmarket::sim

#endif  // SPOTMARKET_TRACE_IO_HPP_

#ifndef SPOTMARKET_TOOLS_CLI_HPP_
#define SPOTMARKET_TOOLS_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "spotmarket/verification.hpp"

namespace spotmarket::cli {

enum ExitCode : int {
  kSuccess = 0,
  kVerificationFailed = 1,
  kNotViable = 2,
  kUsage = 64,
  kDataError = 65,
};

struct Hooks {
  // Equilibrium solver checked by `verify`; tests swap in broken ones.
  EquilibriumSolver verify_solver = closed_form_solver;
};

// Runs one invocation. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err, const Hooks& hooks = {});

// Sweep over q_s or gamma_s with the remaining parameters fixed.
struct SweepSpec {
  std::string variable = "qs";  // "qs" or "gs"
  double start = 10.0;
  double stop = 50.0;
  double step = 10.0;
  double qos_on_demand = 100.0;
  double qos_spot = 30.0;
  double util_on_demand = 0.2;
  double util_spot = 0.5;
};

inline constexpr const char* kSweepHeader =
    "value,c1,p_o,p_s,share_o,share_s,rev_o,rev_s,rev_total,rev_baseline,"
    "agg_u_o,agg_u_s,agg_u_total,agg_u_baseline";

// Swept values from start to stop inclusive. Throws std::invalid_argument
// for an empty range or a value outside the parameter domain.
std::vector<double> sweep_values(const SweepSpec& spec);
void write_sweep_csv(std::ostream& out, const SweepSpec& spec);

}  // namespace spotmarket::cli

#endif  // SPOTMARKET_TOOLS_CLI_HPP_

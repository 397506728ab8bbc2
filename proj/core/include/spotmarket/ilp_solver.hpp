#ifndef SPOTMARKET_ILP_SOLVER_HPP_
#define SPOTMARKET_ILP_SOLVER_HPP_

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace spotmarket::ilp {

inline constexpr std::size_t kDefaultMaxVariables = 64;
inline constexpr double kFeasibilityTolerance = 1e-9;

class ProblemTooLarge : public std::length_error {
 public:
  using std::length_error::length_error;
};

// a · x <= bound
struct Constraint {
  std::vector<double> coefficients;
  double bound = 0.0;
};

// maximize objective · x  over x ∈ {0,1}^n  subject to every constraint.
// Encode >= rows by negation and equalities as a pair of rows.
struct Problem {
  std::vector<double> objective;
  std::vector<Constraint> constraints;

  std::size_t num_variables() const { return objective.size(); }
  // Throws std::invalid_argument on ragged rows.
  void validate() const;
};

enum class Status { kOptimal, kInfeasible };

struct Solution {
  Status status = Status::kInfeasible;
  std::vector<std::uint8_t> assignment;
  double objective_value = 0.0;
};

struct SolverOptions {
  std::size_t max_variables = kDefaultMaxVariables;
};

// Exact depth-first branch and bound. Among all maximizers, returns the
// lexicographically smallest assignment (x_0 most significant, 0 < 1).
Solution solve(const Problem& problem, const SolverOptions& options = {});

// Reference enumeration of all 2^n assignments with the same tie-break.
// Limited to n <= 24.
Solution solve_exhaustive(const Problem& problem);

// c · x summed in index order, the value every comparison uses.
double evaluate(const Problem& problem, const std::vector<std::uint8_t>& x);

bool is_feasible(const Problem& problem, const std::vector<std::uint8_t>& x,
                 double tolerance = kFeasibilityTolerance);

}  // namespace spotmarket::ilp

#endif  // SPOTMARKET_ILP_SOLVER_HPP_

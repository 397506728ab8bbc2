#include "spotmarket/ilp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace spotmarket::ilp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Upper bound on Σ_{i>=depth} c_i x_i subject to one row Σ a_i x_i <= residual
// with 0 <= x_i <= 1: the Lagrangian dual
//   min_{λ>=0} λ·residual + Σ max(0, c_i − λ a_i),
// which equals the LP relaxation of that single row.
class RowBound {
 public:
  RowBound(const std::vector<double>& objective,
           const std::vector<double>& coefficients, std::size_t depth)
      : objective_(objective), coefficients_(coefficients), depth_(depth) {}

  double operator()(double residual) const {
    double value = 0.0;
    double slope = residual;
    breakpoints_.clear();
    for (std::size_t i = depth_; i < objective_.size(); ++i) {
      const double c = objective_[i];
      const double a = coefficients_[i];
      // Active just right of λ = 0.
      const bool active = c > 0.0 || (c == 0.0 && a < 0.0);
      if (c > 0.0) value += c;
      if (active) slope -= a;
      if (a != 0.0) {
        const double lambda = c / a;
        // Items with a > 0 switch off, items with a < 0 switch on; both
        // raise the slope by |a|.
        if (lambda > 0.0) breakpoints_.emplace_back(lambda, std::abs(a));
      }
    }
    if (slope >= 0.0) return value;
    std::sort(breakpoints_.begin(), breakpoints_.end());
    double lambda = 0.0;
    for (const auto& [next, rise] : breakpoints_) {
      value += slope * (next - lambda);
      lambda = next;
      slope += rise;
      if (slope >= 0.0) return value;
    }
    // Even setting every negative-coefficient variable cannot satisfy the row.
    return -kInf;
  }

 private:
  const std::vector<double>& objective_;
  const std::vector<double>& coefficients_;
  std::size_t depth_;
  mutable std::vector<std::pair<double, double>> breakpoints_;
};

class BranchAndBound {
 public:
  explicit BranchAndBound(const Problem& problem)
      : problem_(problem),
        n_(problem.num_variables()),
        m_(problem.constraints.size()),
        lhs_(m_, 0.0),
        x_(n_, 0),
        // min_free_[d][j] = Σ_{i>=d} min(0, a_ji)
        min_free_(n_ + 1, std::vector<double>(m_, 0.0)) {
    for (std::size_t d = n_; d-- > 0;) {
      for (std::size_t j = 0; j < m_; ++j) {
        min_free_[d][j] = min_free_[d + 1][j] +
                          std::min(0.0, problem.constraints[j].coefficients[d]);
      }
    }
    positive_suffix_.assign(n_ + 1, 0.0);
    for (std::size_t d = n_; d-- > 0;) {
      positive_suffix_[d] =
          positive_suffix_[d + 1] + std::max(0.0, problem.objective[d]);
    }
  }

  Solution run() {
    search(0, 0.0);
    Solution s;
    if (found_) {
      s.status = Status::kOptimal;
      s.assignment = best_;
      s.objective_value = best_value_;
    }
    return s;
  }

 private:
  void search(std::size_t depth, double fixed_value) {
    for (std::size_t j = 0; j < m_; ++j) {
      if (lhs_[j] + min_free_[depth][j] >
          problem_.constraints[j].bound + kFeasibilityTolerance) {
        return;
      }
    }
    if (depth == n_) {
      if (!is_feasible(problem_, x_)) return;
      const double v = evaluate(problem_, x_);
      if (!found_ || v > best_value_) {
        found_ = true;
        best_value_ = v;
        best_ = x_;
      }
      return;
    }
    if (found_) {
      const double bound = fixed_value + free_bound(depth);
      const double slack = 1e-9 * (1.0 + std::abs(best_value_));
      if (bound < best_value_ - slack) return;
    }
    for (std::uint8_t v : {std::uint8_t{0}, std::uint8_t{1}}) {
      x_[depth] = v;
      if (v == 1) {
        for (std::size_t j = 0; j < m_; ++j) {
          lhs_[j] += problem_.constraints[j].coefficients[depth];
        }
      }
      search(depth + 1,
             fixed_value + (v == 1 ? problem_.objective[depth] : 0.0));
      if (v == 1) {
        for (std::size_t j = 0; j < m_; ++j) {
          lhs_[j] -= problem_.constraints[j].coefficients[depth];
        }
      }
    }
    x_[depth] = 0;
  }

  double free_bound(std::size_t depth) const {
    double bound = positive_suffix_[depth];
    for (std::size_t j = 0; j < m_; ++j) {
      const RowBound row(problem_.objective,
                         problem_.constraints[j].coefficients, depth);
      bound = std::min(bound, row(problem_.constraints[j].bound - lhs_[j] +
                                  kFeasibilityTolerance));
      if (bound == -kInf) break;
    }
    return bound;
  }

  const Problem& problem_;
  std::size_t n_;
  std::size_t m_;
  std::vector<double> lhs_;
  std::vector<std::uint8_t> x_;
  std::vector<std::vector<double>> min_free_;
  std::vector<double> positive_suffix_;
  bool found_ = false;
  double best_value_ = -kInf;
  std::vector<std::uint8_t> best_;
};

}  // namespace

void Problem::validate() const {
  for (std::size_t j = 0; j < constraints.size(); ++j) {
    if (constraints[j].coefficients.size() != objective.size()) {
      throw std::invalid_argument(
          "constraint row " + std::to_string(j) + " has " +
          std::to_string(constraints[j].coefficients.size()) +
          " coefficients, expected " + std::to_string(objective.size()));
    }
  }
}

double evaluate(const Problem& problem, const std::vector<std::uint8_t>& x) {
  double v = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i]) v += problem.objective[i];
  }
  return v;
}

bool is_feasible(const Problem& problem, const std::vector<std::uint8_t>& x,
                 double tolerance) {
  for (const Constraint& row : problem.constraints) {
    double lhs = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i]) lhs += row.coefficients[i];
    }
    if (lhs > row.bound + tolerance) return false;
  }
  return true;
}

Solution solve(const Problem& problem, const SolverOptions& options) {
  problem.validate();
  if (problem.num_variables() > options.max_variables) {
    throw ProblemTooLarge("ILP has " + std::to_string(problem.num_variables()) +
                          " variables, solver limit is " +
                          std::to_string(options.max_variables));
  }
  return BranchAndBound(problem).run();
}

Solution solve_exhaustive(const Problem& problem) {
  problem.validate();
  const std::size_t n = problem.num_variables();
  if (n > 24) throw ProblemTooLarge("exhaustive enumeration limited to 24 variables");
  Solution best;
  std::vector<std::uint8_t> x(n, 0);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    for (std::size_t i = 0; i < n; ++i) x[i] = (mask >> (n - 1 - i)) & 1U;
    if (!is_feasible(problem, x)) continue;
    const double v = evaluate(problem, x);
    if (best.status == Status::kInfeasible || v > best.objective_value) {
      best.status = Status::kOptimal;
      best.objective_value = v;
      best.assignment = x;
    }
  }
  return best;
}

}  // namespace spotmarket::ilp

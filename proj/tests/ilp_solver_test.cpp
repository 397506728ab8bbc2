#include "spotmarket/ilp_solver.hpp"

#include <gtest/gtest.h>

#include <random>

#include "spotmarket/verification.hpp"

namespace spotmarket::ilp {
namespace {

using Assignment = std::vector<std::uint8_t>;

TEST(IlpSolveTest, SymmetricMaximizersTakeLexicographicallySmallest) {
  const Problem p{{1.0, 1.0}, {{{1.0, 1.0}, 1.0}}};
  const Solution s = solve(p);
  ASSERT_EQ(s.status, Status::kOptimal);
  EXPECT_EQ(s.assignment, (Assignment{0, 1}));
  EXPECT_EQ(s.objective_value, 1.0);
}

TEST(IlpSolveTest, UnconstrainedFollowsSigns) {
  const Solution s = solve(Problem{{3.0, -1.0}, {}});
  ASSERT_EQ(s.status, Status::kOptimal);
  EXPECT_EQ(s.assignment, (Assignment{1, 0}));
  EXPECT_EQ(s.objective_value, 3.0);
}

TEST(IlpSolveTest, ZeroObjectivePrefersZeros) {
  const Solution s = solve(Problem{{0.0, 0.0, 0.0}, {}});
  EXPECT_EQ(s.assignment, (Assignment{0, 0, 0}));
}

TEST(IlpSolveTest, Infeasible) {
  // x0 + x1 >= 3 encoded as -x0 - x1 <= -3.
  const Solution s = solve(Problem{{1.0, 1.0}, {{{-1.0, -1.0}, -3.0}}});
  EXPECT_EQ(s.status, Status::kInfeasible);
}

TEST(IlpSolveTest, EqualityAsTwoRows) {
  // maximize 5a + 4b + 3c subject to a + b + c == 2.
  const Problem p{{5, 4, 3}, {{{1, 1, 1}, 2}, {{-1, -1, -1}, -2}}};
  const Solution s = solve(p);
  EXPECT_EQ(s.assignment, (Assignment{1, 1, 0}));
  EXPECT_EQ(s.objective_value, 9.0);
}

TEST(IlpSolveTest, EmptyProblem) {
  const Solution s = solve(Problem{});
  EXPECT_EQ(s.status, Status::kOptimal);
  EXPECT_TRUE(s.assignment.empty());
  EXPECT_EQ(s.objective_value, 0.0);
}

TEST(IlpSolveTest, SizeLimit) {
  Problem p;
  p.objective.assign(65, 1.0);
  EXPECT_THROW(solve(p), ProblemTooLarge);
  SolverOptions wide;
  wide.max_variables = 65;
  EXPECT_EQ(solve(p, wide).objective_value, 65.0);
  p.objective.assign(25, 1.0);
  EXPECT_THROW(solve_exhaustive(p), ProblemTooLarge);
}

TEST(IlpSolveTest, RaggedRowsRejected) {
  const Problem p{{1.0, 2.0}, {{{1.0}, 1.0}}};
  EXPECT_THROW(solve(p), std::invalid_argument);
}

// Negative coefficients make a variable help feasibility; a bound that only
// looks at c would prune this optimum.
TEST(IlpSolveTest, NegativeCoefficientUnlocksValue) {
  const Problem p{{10, -1}, {{{5, -5}, 0}}};
  const Solution s = solve(p);
  EXPECT_EQ(s.assignment, (Assignment{1, 1}));
  EXPECT_EQ(s.objective_value, 9.0);
}

TEST(IlpSolveTest, KnapsacksMatchEnumeration) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> weight(1, 30);
  std::uniform_int_distribution<int> value(0, 40);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + trial % 16;
    Problem p;
    Constraint row;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      p.objective.push_back(value(rng));
      row.coefficients.push_back(weight(rng));
      total += row.coefficients.back();
    }
    row.bound = std::floor(total / 2);
    p.constraints.push_back(row);
    EXPECT_EQ(check_ilp_against_enumeration(p), "") << "trial " << trial;
  }
}

TEST(IlpPropertyTest, RandomProgramsMatchEnumeration) {
  std::mt19937_64 rng(21);
  int optimal = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const Problem p = random_ilp_problem(rng, 14);
    EXPECT_EQ(check_ilp_against_enumeration(p), "") << "trial " << trial;
    const Solution s = solve(p);
    if (s.status == Status::kOptimal) {
      ++optimal;
      EXPECT_TRUE(is_feasible(p, s.assignment));
      EXPECT_EQ(s.objective_value, evaluate(p, s.assignment));
    }
  }
  // The generator should exercise both outcomes.
  EXPECT_GT(optimal, 100);
  EXPECT_LT(optimal, 500);
}

TEST(IlpPropertyTest, RelaxingABoundNeverHurts) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 300; ++trial) {
    Problem p = random_ilp_problem(rng, 12);
    const Solution before = solve(p);
    p.constraints[trial % p.constraints.size()].bound += 2.0;
    const Solution after = solve(p);
    if (before.status == Status::kOptimal) {
      ASSERT_EQ(after.status, Status::kOptimal);
      EXPECT_GE(after.objective_value, before.objective_value);
    }
  }
}

TEST(IlpPropertyTest, DeterministicAcrossCalls) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const Problem p = random_ilp_problem(rng, 20);
    const Solution a = solve(p);
    const Solution b = solve(p);
    EXPECT_EQ(a.status, b.status);
    EXPECT_EQ(a.assignment, b.assignment);
  }
}

}  // namespace
}  // namespace spotmarket::ilp

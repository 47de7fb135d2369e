#include <lqsre/dp_oracle.hpp>
#include <lqsre/riccati.hpp>

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace lqsre {
namespace {

TEST(DpSolve, ScalarRecursionByHand) {
  for (int steps : {1, 7, 64}) {
    const OracleResult r = dp_solve(oracles::benchmark_problem(1.0), steps);
    ASSERT_TRUE(r.constraint_ok);
    EXPECT_NEAR(r.P0(0, 0), oracles::scalar_dp(1.0, steps), 1e-14);
    EXPECT_EQ(r.trajectory.size(), std::size_t(steps) + 1);
    EXPECT_DOUBLE_EQ(r.delta, 1.0 / steps);
  }
}

TEST(DpSolve, FirstOrderConvergence) {
  const Problem p = oracles::benchmark_problem(1.0);
  const double exact = oracles::benchmark_P(1.0, 0.0);
  double prev = std::abs(dp_solve(p, 64).P0(0, 0) - exact);
  for (int steps : {128, 256, 512}) {
    const double e = std::abs(dp_solve(p, steps).P0(0, 0) - exact);
    EXPECT_GT(prev / e, 1.6);
    EXPECT_LT(prev / e, 2.6);
    prev = e;
  }
}

TEST(DpSolve, ConstraintFailureStopsRecursion) {
  const OracleResult r = dp_solve(oracles::benchmark_problem(-0.3), 200);
  EXPECT_FALSE(r.constraint_ok);
  ASSERT_TRUE(r.failed_step.has_value());
  // The continuous constraint is lost near t = ln 0.3 + 1.7 ~ 0.496.
  EXPECT_NEAR(*r.failed_step * r.delta, std::log(0.3) + 1.7, 0.05);
}

TEST(DpSolve, IteratesStaySymmetric) {
  std::mt19937_64 rng(43);
  const Problem p = oracles::random_definite(rng, 3, 2, 2);
  const OracleResult r = dp_solve(p, 100);
  ASSERT_TRUE(r.constraint_ok);
  for (const auto& P : r.trajectory) EXPECT_LE((P - P.transpose()).norm(), 1e-10);
}

}  // namespace
}  // namespace lqsre

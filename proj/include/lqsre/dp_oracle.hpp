#pragma once

#include <lqsre/lq_core.hpp>

#include <optional>
#include <vector>

namespace lqsre {

struct OracleResult {
  double delta = 0;
  Matrix P0;
  /// P_j at t_j = j delta, j = 0..steps.
  std::vector<Matrix> trajectory;
  bool constraint_ok = true;
  /// First step (from the end) whose one-step control weight lost
  /// definiteness.
  std::optional<int> failed_step;
};

/// Backward dynamic programming for the Euler-discretized problem
///   x+ = (I + A dt) x + B u dt + sum_i (C_i x + D_i u) sqrt(dt) z_i,
/// with left-endpoint coefficients. Definiteness of the one-step weight is
/// required up to eps_pos * dt; on failure the recursion stops and the
/// partial trajectory is returned.
OracleResult dp_solve(const Problem& data, int steps,
                      double eps_pos = kDefaultEpsPos);

}  // namespace lqsre

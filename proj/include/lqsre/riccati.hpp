#pragma once

#include <lqsre/lq_core.hpp>

#include <string>
#include <vector>

namespace lqsre {

struct SolverConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  /// Cap on ‖P‖ and on ‖dP/dt‖; exceeding either is reported as blow-up.
  double max_norm = 1e8;
  double eps_pos = kDefaultEpsPos;
  long max_steps = 1'000'000;
  int output_points = 513;

  void Validate() const;
};

enum class RiccatiStatus { kCompleted, kConstraintViolation, kBlowup, kStepLimit };

std::string to_string(RiccatiStatus status);

struct StepStats {
  long accepted = 0;
  long rejected = 0;
  /// min of λ_min(R̂(P)) over every accepted step endpoint.
  double min_margin = 0;
};

/// Solution of dP/dt + f(P, 0) = 0, P(T) = N, R̂(P) > 0 on an ascending
/// output grid. When the status is not kCompleted the stored points cover
/// only the part of the output grid in (t_star, T].
struct RiccatiSolution {
  std::vector<double> times;
  std::vector<Matrix> P;
  std::vector<Matrix> gain;
  std::vector<double> margin;
  RiccatiStatus status = RiccatiStatus::kCompleted;
  double t_star = 0;
  StepStats stats;

  bool completed() const { return status == RiccatiStatus::kCompleted; }
  const Matrix& P0() const { return P.front(); }

  /// Linear interpolation of the stored path; t outside the stored range is
  /// clamped.
  Matrix P_at(double t) const;
  Matrix gain_at(double t) const;
};

/// Integrates backward from P(T) = N with an embedded 5(4) Runge-Kutta pair
/// in reversed time s = T - t, forcing step boundaries at coefficient grid
/// points and output points. Constraint and blow-up events are localized to
/// within 1e-6 T by bisection on the offending step.
RiccatiSolution solve_riccati(const Problem& data,
                              const SolverConfig& config = {});

/// Max over interior probe points of ‖dP/dt + f(P, 0)‖ where dP/dt is the
/// five-point central difference on the output grid. Requires a completed
/// solution with at least five points.
double check_solution_residual(const RiccatiSolution& solution,
                               const Problem& data, int probe_points,
                               double eps_pos = kDefaultEpsPos);

}  // namespace lqsre

#pragma once

#include <lqsre/lq_core.hpp>
#include <lqsre/riccati.hpp>

#include <cstdint>
#include <functional>
#include <limits>

namespace lqsre {

struct SimConfig {
  /// Independent samples; with antithetic pairing each sample is the average
  /// of a (W, -W) pair of trajectories.
  long n_paths = 10000;
  int n_steps = 256;
  std::uint64_t seed = 1;
  bool antithetic = true;
  /// Worker threads; results do not depend on this value.
  int threads = 1;

  void Validate() const;
};

/// Control law u(t) = G(t) x(t) + v(t).
struct ControlPolicy {
  enum class Kind { kFeedbackGain, kFeedbackPlusPerturbation, kOpenLoop, kZero };

  Kind kind = Kind::kZero;
  std::function<Matrix(double)> gain;          // k x n
  std::function<Vector(double)> perturbation;  // k

  static ControlPolicy Zero();
  static ControlPolicy FeedbackGain(std::function<Matrix(double)> gain);
  /// u = Γ(P(t), 0) x with P interpolated from the solution.
  static ControlPolicy FeedbackGain(const RiccatiSolution& solution,
                                    const Problem& data);
  static ControlPolicy FeedbackPlusPerturbation(
      std::function<Matrix(double)> gain,
      std::function<Vector(double)> perturbation);
  static ControlPolicy OpenLoop(std::function<Vector(double)> perturbation);
};

struct SimulationReport {
  double cost_mean = 0;
  double cost_stderr = 0;
  long n_paths = 0;
  /// x'P(0)x at the initial state (completing-square runs only).
  double value = std::numeric_limits<double>::quiet_NaN();
  /// Estimated J - x'P(0)x.
  double cs_lhs = std::numeric_limits<double>::quiet_NaN();
  /// Estimated E ∫ (u - Γx)'R̂(P)(u - Γx) dt on the same paths.
  double cs_rhs = std::numeric_limits<double>::quiet_NaN();
  double cs_residual = std::numeric_limits<double>::quiet_NaN();
  double cs_residual_stderr = std::numeric_limits<double>::quiet_NaN();
};

/// Euler-Maruyama estimate of J(u; xi) with left-point running cost.
/// Throws NumericalOverflow when a state norm exceeds 1e12.
SimulationReport simulate_cost(const Problem& data, const ControlPolicy& policy,
                               const Vector& xi, const SimConfig& config);

/// Both sides of J(u; xi) - xi'P(0)xi = E ∫ (u - Γx)'R̂(P)(u - Γx) dt,
/// accumulated pathwise on common random numbers.
SimulationReport completing_square_report(const Problem& data,
                                          const RiccatiSolution& solution,
                                          const ControlPolicy& policy,
                                          const Vector& xi,
                                          const SimConfig& config);

/// Simulates the closed-loop fundamental matrix X and its inverse flow X̃
/// and returns max over paths and steps of ‖X̃ X - I‖.
double fundamental_pair_check(const Problem& data,
                              const std::function<Matrix(double)>& gain,
                              const SimConfig& config);

/// max over probe points of ‖RΓ + B'P + sum_i D_i'(P C_i + P D_i Γ)‖ for
/// the stored gain Γ. Deterministic.
double hamiltonian_identity_check(const Problem& data,
                                  const RiccatiSolution& solution,
                                  int probe_points);

}  // namespace lqsre

#pragma once

#include <lqsre/lq_core.hpp>

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace lqsre {

/// Scalar function of time given by samples on an ascending grid, linearly
/// interpolated.
struct ScalarPath {
  std::vector<double> times;
  std::vector<double> values;

  double operator()(double t) const;
};

/// Symmetric matrix path on an ascending grid, linearly interpolated.
struct MatrixPath {
  std::vector<double> times;
  std::vector<Matrix> values;

  Matrix operator()(double t) const;
};

/// Candidate F for the subsolution inequalities
///   dF/dt + f(F, 0) >= 0,   R̂(F) > 0,   F(T) <= N,
/// sampled on the problem grid together with its time derivative.
struct SubsolutionCandidate {
  enum class Source { kUser, kScalarPhi, kZero };

  double horizon = 1;
  std::vector<Matrix> F;
  std::vector<Matrix> dF;
  Source source = Source::kUser;
  /// dF came from central differences; the check inflates its tolerance.
  bool differenced = false;

  static SubsolutionCandidate Zero(const Problem& data);
  static SubsolutionCandidate FromSamples(double horizon, std::vector<Matrix> F,
                                          std::vector<Matrix> dF);
  /// dF by second-order differences on the uniform grid.
  static SubsolutionCandidate FromSamples(double horizon, std::vector<Matrix> F);
};

enum class CertificateKind {
  kTheorem32,
  kCorollary31i,
  kCorollary31ii,
  kExplicitSubsolution,
  kShift,
};

enum class FailureReason {
  kNone,
  kConstraint,
  kResidual,
  kTerminal,
  kZeroMargin,
  kPhiNonpositive,
  kCorollaryConditions,
  kShiftResidual,
};

std::string to_string(CertificateKind kind);
std::string to_string(FailureReason reason);

struct Certificate {
  CertificateKind kind = CertificateKind::kExplicitSubsolution;
  bool certified = false;
  /// Margin: R can be lowered by epsilon * I and the witness still works.
  double epsilon = 0;
  FailureReason reason = FailureReason::kNone;
  double t_worst = std::numeric_limits<double>::quiet_NaN();
  std::optional<ScalarPath> phi;
  std::optional<ScalarPath> alpha;
  /// -α φ sum_i D_i'D_i: R must dominate this bound.
  std::optional<MatrixPath> boundary;
  /// sup_t λ_max(boundary(t)); a constant R = r I is admissible above it.
  double threshold = std::numeric_limits<double>::quiet_NaN();
  /// Subsolution witnessing the verdict; the solution P satisfies P >= F.
  MatrixPath witness;
};

/// α(t) in [0, 1) for scalar-φ certificates.
class AlphaSchedule {
 public:
  static AlphaSchedule Constant(double value);
  static AlphaSchedule Sampled(ScalarPath path);
  /// α(t) solving α - ln α = 1 + t on (0, 1]: keeps -α φ constant for the
  /// scalar benchmark, giving the lowest constant threshold.
  static AlphaSchedule OptimalBenchmark();

  double operator()(double t) const { return fn_(t); }
  const std::string& name() const { return name_; }
  const std::optional<double>& constant() const { return constant_; }
  const std::optional<ScalarPath>& samples() const { return samples_; }

 private:
  std::function<double(double)> fn_;
  std::string name_;
  std::optional<double> constant_;
  std::optional<ScalarPath> samples_;
};

/// Root of α - ln α = c on (0, 1] for c >= 1.
double solve_alpha_log_equation(double c);

struct BenchmarkThreshold {
  double alpha;      // root of α - ln α = 2 in (0, 1)
  double threshold;  // -alpha
};

/// Lowest constant control weight certified for the scalar benchmark
/// dP = (P + Λ)^2/(r + P) dt + Λ dW, P(1) = 1.
BenchmarkThreshold example_504_threshold();

Certificate check_subsolution(const SubsolutionCandidate& candidate,
                              const Problem& data, double tol = 1e-9,
                              double eps_pos = kDefaultEpsPos);

/// Scalar-φ certificate: φ solves φ' + λ_min(Υ(α))φ + λ_min(Q) = 0,
/// φ(T) = λ_min(N), evaluated in closed form by quadrature on a refined
/// grid. Throws PreconditionFailed unless sum_i D_i'D_i >= eps_pos I.
Certificate certify_theorem_3_2(const Problem& data, const AlphaSchedule& alpha,
                                double eps_pos = kDefaultEpsPos);

/// Classical cases: (i) R >> 0 with Q, N >= 0; (ii) N >> 0 and
/// sum_i D_i'D_i >> 0 with Q, R >= 0, via the scalar-φ certificate with a
/// constant α.
Certificate certify_corollary_3_1(const Problem& data,
                                  double eps_pos = kDefaultEpsPos,
                                  double alpha = 0.01);

struct ShiftResult {
  Problem data;
  /// max_t ‖K B + sum_i C_i' K D_i‖; the shift is exact when this vanishes.
  double residual = 0;
};

/// Q̂ = Q + dK + A'K + KA + sum C_i'K C_i, R̂ = R + sum D_i'K D_i,
/// N̂ = N - K(T), samplewise on the problem grid.
ShiftResult apply_shift(const Problem& data, const std::vector<Matrix>& K,
                        const std::vector<Matrix>& dK);

/// Shift by K, then the classical certificate on the shifted data. The
/// witness is K plus the shifted witness.
Certificate certify_shift(const Problem& data, const std::vector<Matrix>& K,
                          const std::vector<Matrix>& dK, double tol = 1e-10,
                          double eps_pos = kDefaultEpsPos);

}  // namespace lqsre

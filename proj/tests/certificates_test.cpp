#include <lqsre/certificates.hpp>
#include <lqsre/cli.hpp>
#include <lqsre/riccati.hpp>
#include <lqsre/spec_io.hpp>

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace lqsre {
namespace {

TEST(AlphaEquation, MatchesBisection) {
  for (double c : {1.5, 2.0, 3.0, 10.0}) {
    const double a = solve_alpha_log_equation(c);
    EXPECT_NEAR(a, oracles::alpha_root(c), 1e-12);
    EXPECT_NEAR(a - std::log(a), c, 1e-10);
  }
  EXPECT_DOUBLE_EQ(solve_alpha_log_equation(1.0), 1.0);
}

TEST(ScalarBenchmark, Threshold) {
  const BenchmarkThreshold b = example_504_threshold();
  EXPECT_NEAR(b.alpha, 0.1585943395630394, 1e-10);
  EXPECT_NEAR(b.alpha, 0.15859, 5e-5);
  EXPECT_DOUBLE_EQ(b.threshold, -b.alpha);
}

TEST(ScalarBenchmark, OptimalScheduleKeepsBoundaryFlat) {
  const Certificate c =
      certify_theorem_3_2(oracles::benchmark_problem(-0.15), AlphaSchedule::OptimalBenchmark());
  ASSERT_TRUE(c.certified);
  ASSERT_TRUE(c.phi && c.alpha && c.boundary);
  const double a1 = example_504_threshold().alpha;
  for (std::size_t i = 0; i < c.phi->times.size(); i += 7) {
    EXPECT_NEAR(c.alpha->values[i] * c.phi->values[i], a1, 1e-8);
    EXPECT_NEAR(c.boundary->values[i](0, 0), -a1, 1e-8);
  }
  EXPECT_NEAR(c.threshold, -a1, 1e-8);
  EXPECT_NEAR(c.epsilon, a1 - 0.15, 1e-6);
}

TEST(ScalarBenchmark, ConstantAlphaGivesWeakerThreshold) {
  // With α constant, φ(t) = exp(-(1 - t)/(1 - α)) and the bound is
  // -α min φ = -α exp(-1/(1 - α)).
  for (double a : {0.1, 0.3, 0.5}) {
    const Certificate c =
        certify_theorem_3_2(oracles::benchmark_problem(1.0), AlphaSchedule::Constant(a));
    ASSERT_TRUE(c.certified);
    EXPECT_NEAR(c.threshold, -a * std::exp(-1 / (1 - a)), 1e-9);
    EXPECT_GT(c.threshold, example_504_threshold().threshold);
  }
}

TEST(ScalarBenchmark, ThresholdSeparatesVerdicts) {
  const auto alpha = AlphaSchedule::OptimalBenchmark();
  EXPECT_TRUE(certify_theorem_3_2(oracles::benchmark_problem(-0.15), alpha).certified);
  const Certificate bad = certify_theorem_3_2(oracles::benchmark_problem(-0.17), alpha);
  EXPECT_FALSE(bad.certified);
  EXPECT_EQ(bad.reason, FailureReason::kConstraint);
}

TEST(ScalarPhiCertificate, RequiresNondegenerateDiffusion) {
  const Matrix z = Matrix::Zero(1, 1), o = Matrix::Ones(1, 1);
  const Problem p = Problem::Constant(1.0, z, o, {z}, {z}, o, z, o);
  EXPECT_THROW(certify_theorem_3_2(p, AlphaSchedule::Constant(0.5)), PreconditionFailed);
}

TEST(ScalarPhiCertificate, NonpositivePhiFails) {
  const Matrix z = Matrix::Zero(1, 1), o = Matrix::Ones(1, 1);
  const Problem p = Problem::Constant(1.0, z, o, {z}, {o}, o, z, z);
  const Certificate c = certify_theorem_3_2(p, AlphaSchedule::Constant(0.5));
  EXPECT_FALSE(c.certified);
  EXPECT_EQ(c.reason, FailureReason::kPhiNonpositive);
}

TEST(Subsolution, ZeroForBlowupData) {
  const ProblemSpec spec = parse_spec(*example_text("blowup_ode"));
  const Certificate c = check_subsolution(SubsolutionCandidate::Zero(spec.data), spec.data);
  EXPECT_TRUE(c.certified);
  EXPECT_GT(c.epsilon, 0.0);
  // min g on the grid is 0.002^2.
  EXPECT_NEAR(c.epsilon, 4e-6 - kDefaultEpsPos, 1e-6 * 4e-6);
}

TEST(Subsolution, FailsOnTerminalAndResidual) {
  const Problem p = oracles::benchmark_problem(1.0);
  const int m = p.intervals() + 1;
  const std::vector<Matrix> flat(std::size_t(m), Matrix::Zero(1, 1));
  // With Q = 10 the constant F = 2 has positive residual but F(T) > N.
  const Matrix z = Matrix::Zero(1, 1), o = Matrix::Ones(1, 1);
  const Problem heavy = Problem::Constant(1.0, z, o, {z}, {o}, o, 10 * o, o);
  const auto high = SubsolutionCandidate::FromSamples(
      1.0, std::vector<Matrix>(std::size_t(m), Matrix::Constant(1, 1, 2.0)), flat);
  Certificate c = check_subsolution(high, heavy);
  EXPECT_FALSE(c.certified);
  EXPECT_EQ(c.reason, FailureReason::kTerminal);

  // F = 0.5 constant: dF/dt + f(F) = -0.25/1.5 < 0.
  const auto mid = SubsolutionCandidate::FromSamples(
      1.0, std::vector<Matrix>(std::size_t(m), Matrix::Constant(1, 1, 0.5)), flat);
  c = check_subsolution(mid, p);
  EXPECT_FALSE(c.certified);
  EXPECT_EQ(c.reason, FailureReason::kResidual);
}

TEST(Subsolution, ZeroMarginIsNotCertified) {
  const Matrix z = Matrix::Zero(1, 1), o = Matrix::Ones(1, 1);
  // R = eps_pos exactly at F = 0: no room to lower R.
  const Problem p = Problem::Constant(1.0, z, o, {z}, {z}, 2e-8 * o, z, o);
  const Certificate c = check_subsolution(SubsolutionCandidate::Zero(p), p, 1e-9, 2e-8);
  EXPECT_FALSE(c.certified);
}

TEST(ClassicalCertificate, CaseOneForDefiniteData) {
  std::mt19937_64 rng(29);
  const Problem p = oracles::random_definite(rng, 2, 1, 1);
  const Certificate c = certify_corollary_3_1(p);
  EXPECT_TRUE(c.certified);
  EXPECT_EQ(c.kind, CertificateKind::kCorollary31i);
}

TEST(ClassicalCertificate, CaseTwoForZeroControlWeight) {
  const Matrix z = Matrix::Zero(1, 1), o = Matrix::Ones(1, 1);
  const Problem p = Problem::Constant(1.0, z, o, {z}, {o}, z, z, o);
  const Certificate c = certify_corollary_3_1(p);
  EXPECT_TRUE(c.certified);
  EXPECT_EQ(c.kind, CertificateKind::kCorollary31ii);
}

TEST(ClassicalCertificate, FailsOtherwise) {
  const Certificate c = certify_corollary_3_1(oracles::benchmark_problem(-0.15));
  EXPECT_FALSE(c.certified);
  EXPECT_EQ(c.reason, FailureReason::kCorollaryConditions);
}

TEST(Shift, ZeroShiftIsIdentity) {
  std::mt19937_64 rng(31);
  const Problem p = oracles::random_definite(rng, 2, 1, 2);
  const std::vector<Matrix> z(std::size_t(p.intervals() + 1), Matrix::Zero(2, 2));
  const ShiftResult s = apply_shift(p, z, z);
  EXPECT_EQ(s.residual, 0.0);
  for (int j = 0; j <= p.intervals(); ++j) {
    EXPECT_EQ(s.data.Q.samples()[std::size_t(j)], p.Q.samples()[std::size_t(j)]);
    EXPECT_EQ(s.data.R.samples()[std::size_t(j)], p.R.samples()[std::size_t(j)]);
  }
  EXPECT_EQ(s.data.N, p.N);
}

TEST(Shift, RoundTripRestoresData) {
  std::mt19937_64 rng(37);
  const Problem p = oracles::random_definite(rng, 2, 1, 1);
  std::vector<Matrix> K, dK, mK, mdK;
  for (int j = 0; j <= p.intervals(); ++j) {
    K.push_back(oracles::random_psd(rng, 2, 0.0));
    dK.push_back(oracles::random_psd(rng, 2, 0.0));
    mK.push_back(-K.back());
    mdK.push_back(-dK.back());
  }
  const ShiftResult there = apply_shift(p, K, dK);
  const ShiftResult back = apply_shift(there.data, mK, mdK);
  for (int j = 0; j <= p.intervals(); ++j) {
    EXPECT_LE((back.data.Q.samples()[std::size_t(j)] - p.Q.samples()[std::size_t(j)]).norm(), 1e-12);
    EXPECT_LE((back.data.R.samples()[std::size_t(j)] - p.R.samples()[std::size_t(j)]).norm(), 1e-12);
  }
  EXPECT_LE((back.data.N - p.N).norm(), 1e-12);
}

TEST(Shift, ShiftDemoRoundTrip) {
  const ProblemSpec spec = parse_spec(*example_text("shift_demo"));
  const auto& c = *spec.certificate;
  const ShiftResult s = apply_shift(spec.data, c.K, c.dK);
  EXPECT_EQ(s.residual, 0.0);
  RiccatiSolution sol = solve_riccati(s.data, spec.solver);
  ASSERT_TRUE(sol.completed());
  const Path K(spec.data.horizon, c.K, Interpolation::kPiecewiseLinear);
  for (std::size_t i = 0; i < sol.times.size(); ++i) sol.P[i] += K(sol.times[i]);
  EXPECT_LE(check_solution_residual(sol, spec.data, 64), 10 * spec.solver.rel_tol);
  const Certificate cert = certify_shift(spec.data, c.K, c.dK);
  EXPECT_TRUE(cert.certified);
}

TEST(SoundnessChain, CertifiedImpliesCompletedAndDominates) {
  const auto alpha = AlphaSchedule::OptimalBenchmark();
  for (double r : {1.0, 0.0, -0.1, -0.15, -0.158}) {
    const Problem p = oracles::benchmark_problem(r);
    const Certificate c = certify_theorem_3_2(p, alpha);
    ASSERT_TRUE(c.certified) << r;
    const RiccatiSolution sol = solve_riccati(p);
    ASSERT_TRUE(sol.completed()) << r;
    for (std::size_t i = 0; i < sol.times.size(); ++i) {
      EXPECT_GE(min_eigenvalue(sol.P[i] - c.witness(sol.times[i])), -1e-6);
    }
  }
}

}  // namespace
}  // namespace lqsre

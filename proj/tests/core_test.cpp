#include <lqsre/lq_core.hpp>

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace lqsre {
namespace {

TEST(SymmetricMatrix, ProjectsSmallAsymmetry) {
  Matrix m(2, 2);
  m << 1, 2, 2 + 1e-12, 3;
  const Symmetric s(m);
  EXPECT_EQ(s(0, 1), s(1, 0));
  EXPECT_NEAR(s(0, 1), 2, 1e-12);
}

TEST(SymmetricMatrix, RejectsLargeAsymmetry) {
  Matrix m(2, 2);
  m << 1, 2, 2.1, 3;
  EXPECT_THROW(Symmetric{m}, InvalidProblem);
}

TEST(CoefficientPath, PiecewiseLinearInterpolates) {
  const Path p(2.0, {Matrix::Constant(1, 1, 0.0), Matrix::Constant(1, 1, 4.0),
                     Matrix::Constant(1, 1, 2.0)},
               Interpolation::kPiecewiseLinear);
  EXPECT_EQ(p.intervals(), 2);
  EXPECT_DOUBLE_EQ(p(0.5)(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(p(1.0)(0, 0), 4.0);
  EXPECT_DOUBLE_EQ(p(1.5)(0, 0), 3.0);
  EXPECT_DOUBLE_EQ(p(2.0)(0, 0), 2.0);
}

TEST(CoefficientPath, PiecewiseConstantUsesLeftSample) {
  const Path p(1.0, {Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 5.0)},
               Interpolation::kPiecewiseConstantLeft);
  EXPECT_DOUBLE_EQ(p(0.0)(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(p(0.999)(0, 0), 1.0);
}

TEST(CoefficientPath, RejectsMismatchedShapes) {
  EXPECT_THROW(Path(1.0, {Matrix::Zero(1, 1), Matrix::Zero(2, 2)},
                    Interpolation::kPiecewiseLinear),
               InvalidProblem);
  EXPECT_THROW(Path(1.0, {Matrix::Zero(1, 1)}, Interpolation::kPiecewiseLinear),
               InvalidProblem);
}

TEST(Problem, ValidateCatchesDimensionErrors) {
  Problem p = oracles::benchmark_problem(1.0);
  EXPECT_NO_THROW(p.Validate());
  p.N = Matrix::Identity(2, 2);
  EXPECT_THROW(p.Validate(), InvalidProblem);
}

TEST(Problem, ValidateCatchesAsymmetricR) {
  Matrix r(2, 2);
  r << 1, 0, 0.5, 1;
  const Matrix z = Matrix::Zero(2, 2);
  EXPECT_THROW(Problem::Constant(1.0, z, Matrix::Identity(2, 2), {z},
                                 {Matrix::Identity(2, 2)}, r, z, z)
                   .Validate(),
               InvalidProblem);
}

TEST(MinEigenvalue, MatchesEigenSolver) {
  std::mt19937_64 rng(3);
  for (int n = 1; n <= 4; ++n) {
    for (int rep = 0; rep < 20; ++rep) {
      Matrix m = oracles::random_matrix(rng, n, n, 3.0);
      m = (m + m.transpose()).eval();
      Eigen::SelfAdjointEigenSolver<Matrix> es(m);
      EXPECT_NEAR(min_eigenvalue(m), es.eigenvalues()(0), 1e-10 * (1 + m.norm()));
    }
  }
}

TEST(Evaluators, ScalarFormulas) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int rep = 0; rep < 200; ++rep) {
    const oracles::ScalarMaps s{u(rng), u(rng), u(rng), u(rng), 1.5 + u(rng), u(rng)};
    const double p = 0.5 + u(rng);
    const double lam = u(rng);
    const Matrix one = Matrix::Ones(1, 1);
    Coefficients<double> c{s.a * one, s.b * one, {s.c * one}, {s.d * one}, s.r * one, s.q * one};
    const std::vector<Matrix> lambda = {lam * one};
    const auto terms = eval_terms<double>(p * one, lambda, c);
    EXPECT_NEAR(terms.hat_R(0, 0), s.hat_R(p), 1e-12);
    EXPECT_NEAR(terms.gamma(0, 0), s.gamma(p, lam), 1e-12);
    EXPECT_NEAR(terms.f(0, 0), s.f(p, lam), 1e-12);
  }
}

TEST(Evaluators, ConstraintViolationCarriesMargin) {
  const Problem p = oracles::benchmark_problem(-0.5);
  try {
    eval_gamma(Symmetric::Project(Matrix::Constant(1, 1, 0.2)), {}, p, 0.3);
    FAIL() << "expected ConstraintViolation";
  } catch (const ConstraintViolation& e) {
    EXPECT_DOUBLE_EQ(e.time(), 0.3);
    EXPECT_NEAR(e.margin(), -0.3, 1e-15);
  }
}

TEST(Evaluators, FIsSymmetricAndGammaSolvesIdentity) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    const Problem p = oracles::random_definite(rng, 3, 2, 2);
    const Matrix P = oracles::random_psd(rng, 3, 0.1);
    const auto c = p.At(0.37);
    const auto t = eval_terms<double>(P, {}, c);
    EXPECT_LE((t.f.matrix() - t.f.matrix().transpose()).norm(), 1e-12 * (1 + t.f.matrix().norm()));
    const Matrix residual = t.hat_R.matrix() * t.gamma + coupling<double>(P, {}, c);
    EXPECT_LE(residual.norm(), 1e-10 * (1 + P.norm()));
  }
}

}  // namespace
}  // namespace lqsre

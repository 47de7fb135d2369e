#include <lqsre/cli.hpp>
#include <lqsre/spec_io.hpp>

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace lqsre {
namespace {

void expect_identical(const Problem& a, const Problem& b) {
  EXPECT_EQ(a.n, b.n);
  EXPECT_EQ(a.k, b.k);
  EXPECT_EQ(a.d, b.d);
  EXPECT_EQ(a.horizon, b.horizon);
  EXPECT_EQ(a.A.interpolation(), b.A.interpolation());
  EXPECT_EQ(a.A.samples(), b.A.samples());
  EXPECT_EQ(a.B.samples(), b.B.samples());
  for (int i = 0; i < a.d; ++i) {
    EXPECT_EQ(a.C[std::size_t(i)].samples(), b.C[std::size_t(i)].samples());
    EXPECT_EQ(a.D[std::size_t(i)].samples(), b.D[std::size_t(i)].samples());
  }
  EXPECT_EQ(a.R.samples(), b.R.samples());
  EXPECT_EQ(a.Q.samples(), b.Q.samples());
  EXPECT_EQ(a.N, b.N);
}

TEST(SpecIo, BundledExamplesRoundTrip) {
  for (const auto& name : example_names()) {
    SCOPED_TRACE(name);
    const ProblemSpec a = parse_spec(*example_text(name));
    const ProblemSpec b = parse_spec(dump_spec(a));
    expect_identical(a.data, b.data);
    EXPECT_EQ(dump_spec(a), dump_spec(b));
  }
}

TEST(SpecIo, RandomProblemsRoundTripBitExact) {
  std::mt19937_64 rng(47);
  for (int rep = 0; rep < 20; ++rep) {
    ProblemSpec s;
    s.data = oracles::random_definite(rng, 1 + rep % 3, 1 + rep % 2, 1 + rep % 2, 4, 0.1 + rep);
    s.solver.rel_tol = 1.0 / 3.0;
    const ProblemSpec back = parse_spec(dump_spec(s));
    expect_identical(s.data, back.data);
    EXPECT_EQ(back.solver.rel_tol, 1.0 / 3.0);
  }
}

TEST(SpecIo, ConstantShorthandExpands) {
  const ProblemSpec s = parse_spec(*example_text("definite_2x2"), {"grid.points=5"});
  EXPECT_EQ(s.data.intervals(), 4);
  for (const auto& m : s.data.A.samples()) EXPECT_EQ(m, s.data.A.samples().front());
}

TEST(SpecIo, OverridesPatchBeforeValidation) {
  const ProblemSpec s = parse_spec(*example_text("example504_r1"),
                                   {"coefficients.R=-0.15", "solver.rel_tol=1e-9",
                                    "coefficients.D.0=2", "simulation.seed=99"});
  EXPECT_EQ(s.data.R.samples().front()(0, 0), -0.15);
  EXPECT_EQ(s.data.D.front().samples().front()(0, 0), 2.0);
  EXPECT_EQ(s.solver.rel_tol, 1e-9);
  EXPECT_EQ(s.simulation->config.seed, 99u);
}

TEST(SpecIo, DiagnosticsNameLineAndField) {
  const std::string text =
      "dimensions: {n: 2, k: 1, d: 1}\n"
      "horizon: 1\n"
      "coefficients:\n"
      "  B: [[0], [1]]\n"
      "  C: [[[0, 0], [0, 0]]]\n"
      "  D: [[[0], [0]]]\n"
      "  R: [[1, 2]]\n"
      "terminal: [[1, 0], [0, 1]]\n";
  try {
    parse_spec(text);
    FAIL() << "expected SpecError";
  } catch (const SpecError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("spec:7:"), std::string::npos) << msg;
    EXPECT_NE(msg.find("coefficients.R"), std::string::npos) << msg;
  }
}

TEST(SpecIo, RejectsUnknownKeysAndBadValues) {
  const std::string base = *example_text("example504_r1");
  EXPECT_THROW(parse_spec(base, {"coefficients.E=1"}), SpecError);
  EXPECT_THROW(parse_spec(base, {"horizon=-1"}), SpecError);
  EXPECT_THROW(parse_spec(base, {"horizon=abc"}), SpecError);
  EXPECT_THROW(parse_spec(base, {"certificate.kind=magic"}), SpecError);
  EXPECT_THROW(parse_spec(base, {"noequals"}), SpecError);
  EXPECT_THROW(parse_spec("[1, 2]"), SpecError);
  EXPECT_THROW(parse_spec("a: [1"), SpecError);
  EXPECT_THROW(load_spec("/nonexistent/spec.yaml"), SpecError);
}

TEST(SpecIo, ScalarPathForOneByOne) {
  const ProblemSpec s = parse_spec(*example_text("example504_r1"),
                                   {"grid.points=3", "coefficients.R=[1, 2, 3]"});
  EXPECT_EQ(s.data.R.samples()[2](0, 0), 3.0);
  EXPECT_THROW(parse_spec(*example_text("example504_r1"), {"coefficients.R=[1, 2, 3]"}), SpecError);
}

}  // namespace
}  // namespace lqsre

#include <lqsre/cli.hpp>

#include <gtest/gtest.h>
#include <yaml-cpp/yaml.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"

namespace lqsre {
namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("lqsre_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  CommandOptions opts(const std::string& spec) {
    CommandOptions o;
    o.spec = spec;
    o.out = (dir_ / "report.yaml").string();
    o.quiet = true;
    return o;
  }
  YAML::Node report() { return YAML::LoadFile((dir_ / "report.yaml").string()); }

  std::filesystem::path dir_;
  std::ostringstream err_;
};

TEST_F(CliTest, SolveBenchmark) {
  EXPECT_EQ(cmd_solve(opts("example504_r1"), err_), kExitOk);
  const YAML::Node r = report();
  EXPECT_EQ(r["status"].as<std::string>(), "Completed");
  EXPECT_NEAR(r["P0"][0][0].as<double>(), oracles::benchmark_P(1.0, 0.0), 1e-6);
  EXPECT_TRUE(r["timings"]);
}

TEST_F(CliTest, SolveFromMaterializedFile) {
  ASSERT_EQ(cmd_example("blowup_ode", dir_.string(), err_), kExitOk);
  EXPECT_EQ(cmd_solve(opts((dir_ / "blowup_ode.yaml").string()), err_), kExitBlowup);
  const double t_star = report()["t_star"].as<double>();
  EXPECT_GT(t_star, 0.9);
  EXPECT_LT(t_star, 1.0);
}

TEST_F(CliTest, SolveConstraintViolation) {
  auto o = opts("example504_r1");
  o.overrides = {"coefficients.R=-0.3"};
  EXPECT_EQ(cmd_solve(o, err_), kExitConstraint);
  EXPECT_EQ(report()["status"].as<std::string>(), "ConstraintViolation");
}

TEST_F(CliTest, InputErrors) {
  EXPECT_EQ(cmd_solve(opts((dir_ / "missing.yaml").string()), err_), kExitInputError);
  auto o = opts("example504_r1");
  o.overrides = {"coefficients.R=[[1, 2]]"};
  EXPECT_EQ(cmd_solve(o, err_), kExitInputError);
  EXPECT_NE(err_.str().find("coefficients.R"), std::string::npos);
  EXPECT_EQ(cmd_example("nope", dir_.string(), err_), kExitInputError);
  EXPECT_NE(err_.str().find("example504_r1"), std::string::npos);
}

TEST_F(CliTest, CertifyVerdicts) {
  EXPECT_EQ(cmd_certify(opts("example504_rneg015"), err_), kExitOk);
  YAML::Node r = report();
  EXPECT_EQ(r["certificate"]["verdict"].as<std::string>(), "Certified");
  EXPECT_EQ(r["solution"]["status"].as<std::string>(), "Completed");

  EXPECT_EQ(cmd_certify(opts("example504_rneg017"), err_), kExitCertificateFailed);
  r = report();
  EXPECT_EQ(r["certificate"]["verdict"].as<std::string>(), "Failed");
  EXPECT_TRUE(r["certificate"]["t_worst"]);

  EXPECT_EQ(cmd_certify(opts("definite_2x2"), err_), kExitOk);
  EXPECT_EQ(report()["certificate"]["kind"].as<std::string>(), "corollary-3.1-i");
}

TEST_F(CliTest, CertifyNeedsBlock) {
  ASSERT_EQ(cmd_example("definite_2x2", dir_.string(), err_), kExitOk);
  const auto path = dir_ / "definite_2x2.yaml";
  YAML::Node spec = YAML::LoadFile(path.string());
  spec.remove("certificate");
  std::ofstream(path) << YAML::Dump(spec);
  EXPECT_EQ(cmd_certify(opts(path.string()), err_), kExitInputError);
}

TEST_F(CliTest, OracleTable) {
  auto o = opts("definite_2x2");
  o.steps = {64, 128, 256};
  EXPECT_EQ(cmd_oracle(o, err_), kExitOk);
  const YAML::Node rows = report()["oracle"];
  ASSERT_EQ(rows.size(), 3u);
  for (std::size_t i = 1; i < 3; ++i) {
    const double ratio = rows[i]["ratio"].as<double>();
    EXPECT_GE(ratio, 1.6);
    EXPECT_LE(ratio, 2.6);
  }
}

TEST_F(CliTest, SimulateReportsSquareResidual) {
  auto o = opts("definite_2x2");
  o.overrides = {"simulation.n_paths=2000", "simulation.n_steps=64"};
  EXPECT_EQ(cmd_simulate(o, err_), kExitOk);
  const YAML::Node s = report()["simulation"];
  EXPECT_LE(s["cs_residual"].as<double>(), 3 * s["cs_residual_stderr"].as<double>() + 0.1);
  EXPECT_GT(s["cs_rhs"].as<double>(), 0.0);
}

TEST_F(CliTest, ReportsAreDeterministic) {
  auto o = opts("definite_2x2");
  o.overrides = {"simulation.n_paths=500", "simulation.n_steps=32"};
  ASSERT_EQ(cmd_simulate(o, err_), kExitOk);
  YAML::Node a = report();
  ASSERT_EQ(cmd_simulate(o, err_), kExitOk);
  YAML::Node b = report();
  a.remove("timings");
  b.remove("timings");
  EXPECT_EQ(YAML::Dump(a), YAML::Dump(b));
}

TEST_F(CliTest, ExampleWritesVerbatim) {
  for (const auto& name : example_names()) {
    ASSERT_EQ(cmd_example(name, dir_.string(), err_), kExitOk);
    std::ifstream in(dir_ / (name + ".yaml"));
    std::stringstream buf;
    buf << in.rdbuf();
    EXPECT_EQ(buf.str(), *example_text(name));
  }
}

}  // namespace
}  // namespace lqsre

#include <lqsre/cli.hpp>

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Indefinite stochastic LQ: Riccati solver, certificates, Monte Carlo checks"};
  app.require_subcommand(1);

  lqsre::CommandOptions options;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--spec", options.spec, "Spec file or bundled example name")->required();
    sub->add_option("--out", options.out, "Report path (default: standard output)");
    sub->add_option("--set", options.overrides, "Override key.path=value (repeatable)")
        ->take_all();
    sub->add_flag("--quiet", options.quiet, "No summary on standard error");
  };
  auto* solve = app.add_subcommand("solve", "Integrate the Riccati equation");
  common(solve);
  auto* certify = app.add_subcommand("certify", "Check the spec's certificate, then solve");
  common(certify);
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo value and completing-square check");
  common(simulate);
  auto* oracle = app.add_subcommand("oracle", "Compare with the discrete-time recursion");
  common(oracle);
  oracle->add_option("--steps", options.steps, "Step counts (default 64 128 256 512)");

  std::string name, out_dir;
  auto* example = app.add_subcommand("example", "Write a bundled example spec");
  example->add_option("name", name, "Example name")->required();
  example->add_option("--out", out_dir, "Output directory (default: standard output)");
  bool example_quiet = false;
  example->add_flag("--quiet", example_quiet, "Accepted for symmetry; example prints nothing else");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : lqsre::kExitInputError;
  }

  if (*solve) return lqsre::cmd_solve(options, std::cerr);
  if (*certify) return lqsre::cmd_certify(options, std::cerr);
  if (*simulate) return lqsre::cmd_simulate(options, std::cerr);
  if (*oracle) return lqsre::cmd_oracle(options, std::cerr);
  return lqsre::cmd_example(name, out_dir, std::cerr);
}

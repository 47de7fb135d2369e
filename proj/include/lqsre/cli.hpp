#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace lqsre {

enum ExitCode : int {
  kExitOk = 0,
  kExitInputError = 1,
  kExitConstraint = 2,
  kExitBlowup = 3,
  kExitCertificateFailed = 4,
};

struct CommandOptions {
  /// A spec file path or the name of a bundled example.
  std::string spec;
  /// Report destination; empty means standard output.
  std::string out;
  std::vector<std::string> overrides;
  bool quiet = false;
  /// Step counts for the oracle table.
  std::vector<int> steps = {64, 128, 256, 512};
};

int cmd_solve(const CommandOptions& options, std::ostream& err);
int cmd_certify(const CommandOptions& options, std::ostream& err);
int cmd_simulate(const CommandOptions& options, std::ostream& err);
int cmd_oracle(const CommandOptions& options, std::ostream& err);
/// Writes <out_dir>/<name>.yaml, or to standard output when out_dir is empty.
int cmd_example(const std::string& name, const std::string& out_dir,
                std::ostream& err);

const std::vector<std::string>& example_names();
std::optional<std::string> example_text(const std::string& name);

}  // namespace lqsre

#pragma once

#include <lqsre/lq_core.hpp>
#include <lqsre/riccati.hpp>
#include <lqsre/simulate.hpp>

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace lqsre {

/// Malformed spec file; the message carries line/column and field path.
class SpecError : public InvalidProblem {
 public:
  using InvalidProblem::InvalidProblem;
};

struct CertificateSpec {
  /// theorem-3.2, corollary-3.1, corollary-3.1-i, corollary-3.1-ii,
  /// explicit-subsolution or shift.
  std::string kind;
  /// Constant value, a named schedule ("optimal-504"), or samples on the
  /// coefficient grid.
  std::variant<std::monostate, double, std::string, std::vector<double>> alpha;
  std::vector<Matrix> K, dK, F, dF;
  std::optional<double> tol;
};

struct SimulationSpec {
  SimConfig config;
  Vector xi;
  /// Constant perturbation v added to the optimal feedback: u = Γx + v.
  Vector perturbation;
};

struct ProblemSpec {
  Problem data;
  SolverConfig solver;
  std::optional<CertificateSpec> certificate;
  std::optional<SimulationSpec> simulation;
};

/// Parses a YAML spec. Each override is "a.b.c=value", where value is YAML
/// and numeric path components index sequences; overrides are applied
/// before validation.
ProblemSpec parse_spec(const std::string& text,
                       const std::vector<std::string>& overrides = {});
ProblemSpec load_spec(const std::string& path,
                      const std::vector<std::string>& overrides = {});

/// Full serialization; every float carries 17 significant digits, so
/// parse_spec(dump_spec(s)) reproduces s exactly.
std::string dump_spec(const ProblemSpec& spec);

std::string to_string(Interpolation interp);

}  // namespace lqsre

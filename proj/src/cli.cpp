#include <lqsre/cli.hpp>

#include <lqsre/certificates.hpp>
#include <lqsre/dp_oracle.hpp>
#include <lqsre/riccati.hpp>
#include <lqsre/simulate.hpp>
#include <lqsre/spec_io.hpp>

#include <yaml-cpp/yaml.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace lqsre {

namespace detail {
const std::map<std::string, std::string>& bundled_examples();
}

const std::vector<std::string>& example_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& kv : detail::bundled_examples()) out.push_back(kv.first);
    return out;
  }();
  return names;
}

std::optional<std::string> example_text(const std::string& name) {
  const auto& all = detail::bundled_examples();
  const auto it = all.find(name);
  if (it == all.end()) return std::nullopt;
  return it->second;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string names_list() {
  std::string s;
  for (const auto& n : example_names()) s += (s.empty() ? "" : ", ") + n;
  return s;
}

ProblemSpec load(const CommandOptions& o) {
  if (!std::filesystem::exists(o.spec)) {
    if (auto text = example_text(o.spec)) return parse_spec(*text, o.overrides);
  }
  return load_spec(o.spec, o.overrides);
}

class Report {
 public:
  Report() {
    out_.SetDoublePrecision(17);
    out_ << YAML::BeginMap;
  }

  template <typename T>
  Report& kv(const std::string& key, const T& value) {
    out_ << YAML::Key << key << YAML::Value << value;
    return *this;
  }
  Report& matrix(const std::string& key, const Matrix& m) {
    out_ << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      out_ << YAML::Flow << YAML::BeginSeq;
      for (Eigen::Index j = 0; j < m.cols(); ++j) out_ << m(i, j);
      out_ << YAML::EndSeq;
    }
    out_ << YAML::EndSeq;
    return *this;
  }
  Report& begin(const std::string& key) {
    out_ << YAML::Key << key << YAML::Value << YAML::BeginMap;
    return *this;
  }
  Report& begin_list(const std::string& key) {
    out_ << YAML::Key << key << YAML::Value << YAML::BeginSeq;
    return *this;
  }
  Report& item() {
    out_ << YAML::BeginMap;
    return *this;
  }
  Report& end() {
    out_ << YAML::EndMap;
    return *this;
  }
  Report& end_list() {
    out_ << YAML::EndSeq;
    return *this;
  }

  bool write(const std::string& path, std::ostream& err) {
    out_ << YAML::EndMap;
    const std::string text = std::string(out_.c_str()) + "\n";
    if (path.empty()) {
      std::cout << text;
      return true;
    }
    std::ofstream f(path);
    if (!(f << text)) {
      err << "error: cannot write report to '" << path << "'\n";
      return false;
    }
    return true;
  }

 private:
  YAML::Emitter out_;
};

int status_exit(RiccatiStatus s) {
  switch (s) {
    case RiccatiStatus::kCompleted: return kExitOk;
    case RiccatiStatus::kConstraintViolation: return kExitConstraint;
    case RiccatiStatus::kBlowup:
    case RiccatiStatus::kStepLimit: return kExitBlowup;
  }
  return kExitBlowup;
}

void write_solution(Report& r, const RiccatiSolution& sol, const ProblemSpec& spec) {
  r.kv("status", to_string(sol.status));
  if (sol.completed()) {
    r.matrix("P0", sol.P0());
    if (spec.simulation) {
      const Vector& xi = spec.simulation->xi;
      r.kv("value_at_xi", xi.dot(sol.P0() * xi));
    }
  } else {
    r.kv("t_star", sol.t_star);
  }
  r.kv("margin_min", sol.stats.min_margin);
  r.begin("steps").kv("accepted", sol.stats.accepted).kv("rejected", sol.stats.rejected).end();
}

std::string summary(const RiccatiSolution& sol) {
  std::ostringstream os;
  os.precision(10);
  os << to_string(sol.status);
  if (sol.completed()) {
    os << ", P0 = [" << sol.P0().format(Eigen::IOFormat(10, 0, ", ", "; ")) << "]";
  } else {
    os << " at t* = " << sol.t_star;
  }
  return os.str();
}

// Runs body; maps input errors to exit 1 with a diagnostic.
template <typename Body>
int guarded(const char* name, std::ostream& err, const Body& body) {
  try {
    return body();
  } catch (const SpecError& e) {
    err << name << ": " << e.what() << "\n";
  } catch (const InvalidProblem& e) {
    err << name << ": invalid problem: " << e.what() << "\n";
  } catch (const YAML::Exception& e) {
    err << name << ": " << e.what() << "\n";
  }
  return kExitInputError;
}

AlphaSchedule alpha_schedule(const CertificateSpec& c, const Problem& data) {
  if (const auto* v = std::get_if<double>(&c.alpha)) return AlphaSchedule::Constant(*v);
  if (const auto* samples = std::get_if<std::vector<double>>(&c.alpha)) {
    ScalarPath p;
    for (int j = 0; j <= data.intervals(); ++j) p.times.push_back(data.time(j));
    p.values = *samples;
    return AlphaSchedule::Sampled(p);
  }
  return AlphaSchedule::OptimalBenchmark();
}

Certificate run_certificate(const CertificateSpec& c, const ProblemSpec& spec) {
  const Problem& data = spec.data;
  const double eps = spec.solver.eps_pos;
  if (c.kind == "theorem-3.2") {
    return certify_theorem_3_2(data, alpha_schedule(c, data), eps);
  }
  if (c.kind.rfind("corollary-3.1", 0) == 0) {
    const auto* a = std::get_if<double>(&c.alpha);
    Certificate cert = certify_corollary_3_1(data, eps, a ? *a : 0.01);
    const bool want_i = c.kind == "corollary-3.1-i";
    const bool want_ii = c.kind == "corollary-3.1-ii";
    if ((want_i && cert.kind != CertificateKind::kCorollary31i) ||
        (want_ii && cert.kind != CertificateKind::kCorollary31ii)) {
      cert.kind = want_i ? CertificateKind::kCorollary31i : CertificateKind::kCorollary31ii;
      cert.certified = false;
      cert.epsilon = 0;
      cert.reason = FailureReason::kCorollaryConditions;
    }
    return cert;
  }
  if (c.kind == "explicit-subsolution") {
    const auto cand = c.dF.empty()
                          ? SubsolutionCandidate::FromSamples(data.horizon, c.F)
                          : SubsolutionCandidate::FromSamples(data.horizon, c.F, c.dF);
    return check_subsolution(cand, data, c.tol.value_or(1e-9), eps);
  }
  return certify_shift(data, c.K, c.dK, c.tol.value_or(1e-10), eps);
}

}  // namespace

int cmd_solve(const CommandOptions& o, std::ostream& err) {
  return guarded("solve", err, [&] {
    const auto start = Clock::now();
    const ProblemSpec spec = load(o);
    const RiccatiSolution sol = solve_riccati(spec.data, spec.solver);
    Report r;
    write_solution(r, sol, spec);
    r.begin("timings").kv("solve_s", seconds_since(start)).end();
    if (!r.write(o.out, err)) return int(kExitInputError);
    if (!o.quiet) err << "solve: " << summary(sol) << "\n";
    return status_exit(sol.status);
  });
}

int cmd_certify(const CommandOptions& o, std::ostream& err) {
  return guarded("certify", err, [&] {
    const auto start = Clock::now();
    const ProblemSpec spec = load(o);
    if (!spec.certificate) {
      err << "certify: field 'certificate': missing\n";
      return int(kExitInputError);
    }
    Report r;
    Certificate cert;
    std::string precondition;
    try {
      cert = run_certificate(*spec.certificate, spec);
    } catch (const PreconditionFailed& e) {
      precondition = e.what();
    }
    if (!precondition.empty()) {
      r.begin("certificate").kv("kind", spec.certificate->kind);
      r.kv("verdict", std::string("Failed")).kv("reason", "precondition: " + precondition);
      r.end();
      r.begin("timings").kv("total_s", seconds_since(start)).end();
      r.write(o.out, err);
      if (!o.quiet) err << "certify: Failed (" << precondition << ")\n";
      return int(kExitCertificateFailed);
    }
    r.begin("certificate")
        .kv("kind", to_string(cert.kind))
        .kv("verdict", std::string(cert.certified ? "Certified" : "Failed"))
        .kv("epsilon", cert.epsilon);
    if (std::isfinite(cert.threshold)) r.kv("threshold", cert.threshold);
    if (!cert.certified) {
      r.kv("reason", to_string(cert.reason)).kv("t_worst", cert.t_worst);
    }
    r.end();
    const auto certified_at = Clock::now();
    if (cert.certified) {
      // Soundness chain: the certified problem is solved and the solution
      // must dominate the witness.
      const RiccatiSolution sol = solve_riccati(spec.data, spec.solver);
      r.begin("solution");
      write_solution(r, sol, spec);
      if (sol.completed() && !cert.witness.times.empty()) {
        double gap = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < sol.times.size(); ++i) {
          gap = std::min(gap, min_eigenvalue(sol.P[i] - cert.witness(sol.times[i])));
        }
        r.kv("witness_gap_min", gap);
      }
      r.end();
    }
    r.begin("timings")
        .kv("certify_s", std::chrono::duration<double>(certified_at - start).count())
        .kv("total_s", seconds_since(start))
        .end();
    if (!r.write(o.out, err)) return int(kExitInputError);
    if (!o.quiet) {
      err << "certify: " << (cert.certified ? "Certified" : "Failed") << " ("
          << to_string(cert.kind) << ", epsilon = " << cert.epsilon << ")\n";
    }
    return int(cert.certified ? kExitOk : kExitCertificateFailed);
  });
}

int cmd_simulate(const CommandOptions& o, std::ostream& err) {
  return guarded("simulate", err, [&] {
    const auto start = Clock::now();
    const ProblemSpec spec = load(o);
    if (!spec.simulation) {
      err << "simulate: field 'simulation': missing\n";
      return int(kExitInputError);
    }
    const SimulationSpec& sim = *spec.simulation;
    const RiccatiSolution sol = solve_riccati(spec.data, spec.solver);
    Report r;
    write_solution(r, sol, spec);
    if (!sol.completed()) {
      r.write(o.out, err);
      if (!o.quiet) err << "simulate: " << summary(sol) << "\n";
      return status_exit(sol.status);
    }
    const Vector v = sim.perturbation;
    const ControlPolicy optimal = ControlPolicy::FeedbackGain(sol, spec.data);
    const ControlPolicy policy =
        v.isZero(0) ? optimal
                    : ControlPolicy::FeedbackPlusPerturbation(optimal.gain,
                                                              [v](double) { return v; });
    SimulationReport rep;
    try {
      rep = completing_square_report(spec.data, sol, policy, sim.xi, sim.config);
    } catch (const NumericalOverflow& e) {
      err << "simulate: " << e.what() << "\n";
      return int(kExitBlowup);
    }
    r.begin("simulation")
        .kv("n_paths", rep.n_paths)
        .kv("n_steps", sim.config.n_steps)
        .kv("seed", sim.config.seed)
        .kv("antithetic", sim.config.antithetic)
        .kv("cost_mean", rep.cost_mean)
        .kv("cost_stderr", rep.cost_stderr)
        .kv("value", rep.value)
        .kv("cs_lhs", rep.cs_lhs)
        .kv("cs_rhs", rep.cs_rhs)
        .kv("cs_residual", rep.cs_residual)
        .kv("cs_residual_stderr", rep.cs_residual_stderr)
        .end();
    r.begin("timings").kv("total_s", seconds_since(start)).end();
    if (!r.write(o.out, err)) return int(kExitInputError);
    if (!o.quiet) {
      err << "simulate: cost " << rep.cost_mean << " +- " << rep.cost_stderr
          << ", cs_residual " << rep.cs_residual << " (stderr " << rep.cs_residual_stderr
          << ")\n";
    }
    return int(kExitOk);
  });
}

int cmd_oracle(const CommandOptions& o, std::ostream& err) {
  return guarded("oracle", err, [&] {
    const auto start = Clock::now();
    const ProblemSpec spec = load(o);
    if (o.steps.empty()) {
      err << "oracle: no step counts given\n";
      return int(kExitInputError);
    }
    for (int s : o.steps) {
      if (s < 1) {
        err << "oracle: step counts must be >= 1\n";
        return int(kExitInputError);
      }
    }
    const RiccatiSolution sol = solve_riccati(spec.data, spec.solver);
    Report r;
    write_solution(r, sol, spec);
    if (!sol.completed()) {
      r.write(o.out, err);
      if (!o.quiet) err << "oracle: " << summary(sol) << "\n";
      return status_exit(sol.status);
    }
    int code = kExitOk;
    r.begin_list("oracle");
    double previous = std::numeric_limits<double>::quiet_NaN();
    for (int steps : o.steps) {
      const OracleResult res = dp_solve(spec.data, steps, spec.solver.eps_pos);
      r.item().kv("n_steps", steps).kv("delta", res.delta).kv("constraint_ok", res.constraint_ok);
      if (res.constraint_ok) {
        const double e = (res.P0 - sol.P0()).norm();
        r.matrix("P0", res.P0).kv("error_vs_solver", e);
        if (!std::isnan(previous)) r.kv("ratio", previous / e);
        previous = e;
        if (!o.quiet) err << "oracle: n_steps " << steps << ", error " << e << "\n";
      } else {
        r.kv("failed_step", *res.failed_step);
        previous = std::numeric_limits<double>::quiet_NaN();
        code = kExitConstraint;
        if (!o.quiet) err << "oracle: n_steps " << steps << ", constraint violated\n";
      }
      r.end();
    }
    r.end_list();
    r.begin("timings").kv("total_s", seconds_since(start)).end();
    if (!r.write(o.out, err)) return int(kExitInputError);
    return code;
  });
}

int cmd_example(const std::string& name, const std::string& out_dir, std::ostream& err) {
  const auto text = example_text(name);
  if (!text) {
    err << "example: unknown example '" << name << "'; available: " << names_list() << "\n";
    return kExitInputError;
  }
  if (out_dir.empty()) {
    std::cout << *text;
    return kExitOk;
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  const auto path = std::filesystem::path(out_dir) / (name + ".yaml");
  std::ofstream f(path);
  if (!(f << *text)) {
    err << "example: cannot write '" << path.string() << "'\n";
    return kExitInputError;
  }
  return kExitOk;
}

}  // namespace lqsre

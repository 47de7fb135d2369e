#include <lqsre/spec_io.hpp>

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

namespace lqsre {

std::string to_string(Interpolation interp) {
  return interp == Interpolation::kPiecewiseConstantLeft ? "piecewise-constant-left"
                                                         : "piecewise-linear";
}

namespace {

[[noreturn]] void fail(const YAML::Node& node, const std::string& field,
                       const std::string& msg) {
  std::ostringstream os;
  const YAML::Mark mark = node.IsDefined() ? node.Mark() : YAML::Mark::null_mark();
  if (mark.is_null()) {
    os << "spec: ";
  } else {
    os << "spec:" << mark.line + 1 << ":" << mark.column + 1 << ": ";
  }
  os << "field '" << field << "': " << msg;
  throw SpecError(os.str());
}

std::string join(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

void check_keys(const YAML::Node& node, const std::string& field,
                const std::set<std::string>& allowed) {
  if (!node.IsMap()) fail(node, field, "expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) fail(kv.first, join(field, key), "unknown key");
  }
}

YAML::Node required(const YAML::Node& node, const std::string& key,
                    const std::string& field) {
  const YAML::Node child = node[key];
  if (!child) fail(node, join(field, key), "missing");
  return child;
}

double read_double(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) fail(node, field, "expected a number");
  try {
    return node.as<double>();
  } catch (const YAML::Exception&) {
    fail(node, field, "expected a number, got '" + node.Scalar() + "'");
  }
}

template <typename Int>
Int read_int(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) fail(node, field, "expected an integer");
  try {
    return node.as<Int>();
  } catch (const YAML::Exception&) {
    fail(node, field, "expected an integer, got '" + node.Scalar() + "'");
  }
}

bool read_bool(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) fail(node, field, "expected true or false");
  try {
    return node.as<bool>();
  } catch (const YAML::Exception&) {
    fail(node, field, "expected true or false, got '" + node.Scalar() + "'");
  }
}

int depth(const YAML::Node& node, const std::string& field) {
  if (node.IsScalar()) return 0;
  if (!node.IsSequence() || node.size() == 0) {
    fail(node, field, "expected a number or a non-empty list");
  }
  return 1 + depth(node[0], field);
}

std::string shape(Eigen::Index r, Eigen::Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

Matrix read_matrix(const YAML::Node& node, Eigen::Index rows, Eigen::Index cols,
                   const std::string& field) {
  const int dep = depth(node, field);
  Matrix m(rows, cols);
  if (dep == 0) {
    if (rows != 1 || cols != 1) fail(node, field, "scalar given for a " + shape(rows, cols) + " matrix");
    m(0, 0) = read_double(node, field);
  } else if (dep == 1) {
    if (rows != 1 || Eigen::Index(node.size()) != cols) {
      fail(node, field, "row of length " + std::to_string(node.size()) +
                            " given for a " + shape(rows, cols) + " matrix");
    }
    for (Eigen::Index j = 0; j < cols; ++j) m(0, j) = read_double(node[std::size_t(j)], field);
  } else if (dep == 2) {
    if (Eigen::Index(node.size()) != rows) {
      fail(node, field, std::to_string(node.size()) + " rows given for a " +
                            shape(rows, cols) + " matrix");
    }
    for (Eigen::Index i = 0; i < rows; ++i) {
      const YAML::Node row = node[std::size_t(i)];
      if (!row.IsSequence() || Eigen::Index(row.size()) != cols) {
        fail(row, field, "row " + std::to_string(i) + " must have " +
                             std::to_string(cols) + " entries");
      }
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = read_double(row[std::size_t(j)], field);
    }
  } else {
    fail(node, field, "expected a matrix (list of rows)");
  }
  return m;
}

// Constant shorthand (scalar, row or list of rows) or one matrix per grid
// point. A flat list is a path only for 1x1 targets.
std::vector<Matrix> read_path(const YAML::Node& node, Eigen::Index rows,
                              Eigen::Index cols, int points,
                              const std::string& field) {
  const int dep = depth(node, field);
  const bool sampled = dep == 3 || (dep == 1 && rows == 1 && cols == 1);
  if (!sampled) {
    return std::vector<Matrix>(std::size_t(points), read_matrix(node, rows, cols, field));
  }
  if (int(node.size()) != points) {
    fail(node, field, "expected " + std::to_string(points) + " grid samples, got " +
                          std::to_string(node.size()));
  }
  std::vector<Matrix> out;
  for (int j = 0; j < points; ++j) {
    out.push_back(read_matrix(node[std::size_t(j)], rows, cols,
                              field + "[" + std::to_string(j) + "]"));
  }
  return out;
}

Vector read_vector(const YAML::Node& node, Eigen::Index size, const std::string& field) {
  if (node.IsScalar() && size == 1) return Vector::Constant(1, read_double(node, field));
  if (!node.IsSequence() || Eigen::Index(node.size()) != size) {
    fail(node, field, "expected a list of " + std::to_string(size) + " numbers");
  }
  Vector v(size);
  for (Eigen::Index i = 0; i < size; ++i) v(i) = read_double(node[std::size_t(i)], field);
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

bool is_index(const std::string& s) {
  return !s.empty() && s.find_first_not_of("0123456789") == std::string::npos;
}

void apply_override(YAML::Node& root, const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw SpecError("override '" + text + "': expected key.path=value");
  }
  const auto keys = split(text.substr(0, eq), '.');
  YAML::Node value;
  try {
    value = YAML::Load(text.substr(eq + 1));
  } catch (const YAML::Exception& e) {
    throw SpecError("override '" + text + "': " + e.msg);
  }
  YAML::Node cur = root;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const std::string& key = keys[i];
    if (key.empty()) throw SpecError("override '" + text + "': empty key component");
    const bool last = i + 1 == keys.size();
    if (cur.IsSequence()) {
      if (!is_index(key) || std::stoul(key) >= cur.size()) {
        throw SpecError("override '" + text + "': '" + key + "' is not a valid index");
      }
      if (last) {
        cur[std::stoul(key)] = value;
      } else {
        cur.reset(cur[std::stoul(key)]);
      }
    } else {
      if (cur.IsScalar()) {
        throw SpecError("override '" + text + "': '" + key + "' descends into a scalar");
      }
      if (last) {
        cur[key] = value;
      } else {
        if (!cur[key]) cur[key] = YAML::Node(YAML::NodeType::Map);
        cur.reset(cur[key]);
      }
    }
  }
}

Interpolation read_interpolation(const YAML::Node& node, const std::string& field) {
  const auto s = node.IsScalar() ? node.Scalar() : std::string();
  if (s == "piecewise-linear") return Interpolation::kPiecewiseLinear;
  if (s == "piecewise-constant-left" || s == "piecewise-constant") {
    return Interpolation::kPiecewiseConstantLeft;
  }
  fail(node, field, "expected piecewise-linear or piecewise-constant-left");
}

Problem read_problem(const YAML::Node& root) {
  const YAML::Node dims = required(root, "dimensions", "");
  check_keys(dims, "dimensions", {"n", "k", "d"});
  Problem p;
  p.n = read_int<int>(required(dims, "n", "dimensions"), "dimensions.n");
  p.k = read_int<int>(required(dims, "k", "dimensions"), "dimensions.k");
  p.d = dims["d"] ? read_int<int>(dims["d"], "dimensions.d") : 0;
  if (p.n < 1) fail(dims["n"], "dimensions.n", "must be >= 1");
  if (p.k < 1) fail(dims["k"], "dimensions.k", "must be >= 1");
  if (p.d < 0) fail(dims["d"], "dimensions.d", "must be >= 0");
  p.horizon = read_double(required(root, "horizon", ""), "horizon");
  if (!(p.horizon > 0)) fail(root["horizon"], "horizon", "must be positive");

  int points = 2;
  Interpolation interp = Interpolation::kPiecewiseLinear;
  if (const YAML::Node grid = root["grid"]) {
    check_keys(grid, "grid", {"points", "interpolation"});
    if (grid["points"]) points = read_int<int>(grid["points"], "grid.points");
    if (points < 2) fail(grid["points"], "grid.points", "must be >= 2");
    if (grid["interpolation"]) interp = read_interpolation(grid["interpolation"], "grid.interpolation");
  }

  const YAML::Node co = required(root, "coefficients", "");
  check_keys(co, "coefficients", {"A", "B", "C", "D", "R", "Q"});
  const Eigen::Index n = p.n, k = p.k;
  auto path = [&](const YAML::Node& node, Eigen::Index r, Eigen::Index c,
                  const std::string& field) {
    return Path(p.horizon, read_path(node, r, c, points, field), interp);
  };
  auto zero_or = [&](const char* key, Eigen::Index r, Eigen::Index c) {
    const std::string field = std::string("coefficients.") + key;
    if (!co[key]) {
      return Path(p.horizon, std::vector<Matrix>(std::size_t(points), Matrix::Zero(r, c)), interp);
    }
    return path(co[key], r, c, field);
  };
  p.A = zero_or("A", n, n);
  p.B = path(required(co, "B", "coefficients"), n, k, "coefficients.B");
  p.R = path(required(co, "R", "coefficients"), k, k, "coefficients.R");
  p.Q = zero_or("Q", n, n);
  for (const char* key : {"C", "D"}) {
    const std::string field = std::string("coefficients.") + key;
    const YAML::Node list = co[key];
    if (p.d == 0 && !list) continue;
    if (!list || !list.IsSequence() || int(list.size()) != p.d) {
      fail(list ? list : co, field, "expected a list of d = " + std::to_string(p.d) + " matrices");
    }
    for (int i = 0; i < p.d; ++i) {
      auto& dst = key[0] == 'C' ? p.C : p.D;
      dst.push_back(path(list[std::size_t(i)], n, key[0] == 'C' ? n : k,
                         field + "[" + std::to_string(i) + "]"));
    }
  }
  p.N = read_matrix(required(root, "terminal", ""), n, n, "terminal");
  try {
    p.Validate();
  } catch (const InvalidProblem& e) {
    throw SpecError(std::string("spec: ") + e.what());
  }
  return p;
}

SolverConfig read_solver(const YAML::Node& node) {
  SolverConfig c;
  check_keys(node, "solver",
             {"rel_tol", "abs_tol", "max_norm", "eps_pos", "max_steps", "output_points"});
  if (node["rel_tol"]) c.rel_tol = read_double(node["rel_tol"], "solver.rel_tol");
  if (node["abs_tol"]) c.abs_tol = read_double(node["abs_tol"], "solver.abs_tol");
  if (node["max_norm"]) c.max_norm = read_double(node["max_norm"], "solver.max_norm");
  if (node["eps_pos"]) c.eps_pos = read_double(node["eps_pos"], "solver.eps_pos");
  if (node["max_steps"]) c.max_steps = read_int<long>(node["max_steps"], "solver.max_steps");
  if (node["output_points"]) {
    c.output_points = read_int<int>(node["output_points"], "solver.output_points");
  }
  try {
    c.Validate();
  } catch (const InvalidProblem& e) {
    fail(node, "solver", e.what());
  }
  return c;
}

CertificateSpec read_certificate(const YAML::Node& node, const Problem& p) {
  check_keys(node, "certificate", {"kind", "alpha", "K", "dK", "F", "dF", "tol"});
  CertificateSpec c;
  const YAML::Node kind = required(node, "kind", "certificate");
  c.kind = kind.IsScalar() ? kind.Scalar() : "";
  static const std::set<std::string> kinds = {
      "theorem-3.2",      "corollary-3.1",        "corollary-3.1-i",
      "corollary-3.1-ii", "explicit-subsolution", "shift"};
  if (!kinds.count(c.kind)) fail(kind, "certificate.kind", "unknown certificate kind");
  const int points = p.intervals() + 1;
  if (const YAML::Node a = node["alpha"]) {
    if (a.IsSequence()) {
      std::vector<double> v;
      for (const auto& x : a) v.push_back(read_double(x, "certificate.alpha"));
      if (int(v.size()) != points) {
        fail(a, "certificate.alpha", "expected " + std::to_string(points) + " grid samples");
      }
      c.alpha = v;
    } else if (a.IsScalar()) {
      double value;
      if (YAML::convert<double>::decode(a, value)) {
        c.alpha = value;
      } else if (a.Scalar() == "optimal-504") {
        c.alpha = a.Scalar();
      } else {
        fail(a, "certificate.alpha", "expected a number, a sample list or optimal-504");
      }
    } else {
      fail(a, "certificate.alpha", "expected a number, a sample list or optimal-504");
    }
  }
  for (const char* key : {"K", "dK", "F", "dF"}) {
    if (const YAML::Node m = node[key]) {
      auto samples = read_path(m, p.n, p.n, points, std::string("certificate.") + key);
      std::string k(key);
      (k == "K" ? c.K : k == "dK" ? c.dK : k == "F" ? c.F : c.dF) = std::move(samples);
    }
  }
  if (node["tol"]) c.tol = read_double(node["tol"], "certificate.tol");
  if (c.kind == "shift" && (c.K.empty() || c.dK.empty())) {
    fail(node, "certificate", "shift needs K and dK");
  }
  if (c.kind == "explicit-subsolution" && c.F.empty()) {
    fail(node, "certificate", "explicit-subsolution needs F");
  }
  if (!c.dF.empty() && c.F.empty()) fail(node, "certificate.dF", "given without F");
  return c;
}

SimulationSpec read_simulation(const YAML::Node& node, const Problem& p) {
  check_keys(node, "simulation", {"n_paths", "n_steps", "seed", "antithetic", "threads",
                                  "xi", "perturbation"});
  SimulationSpec s;
  SimConfig& c = s.config;
  if (node["n_paths"]) c.n_paths = read_int<long>(node["n_paths"], "simulation.n_paths");
  if (node["n_steps"]) c.n_steps = read_int<int>(node["n_steps"], "simulation.n_steps");
  if (node["seed"]) c.seed = read_int<std::uint64_t>(node["seed"], "simulation.seed");
  if (node["antithetic"]) c.antithetic = read_bool(node["antithetic"], "simulation.antithetic");
  if (node["threads"]) c.threads = read_int<int>(node["threads"], "simulation.threads");
  try {
    c.Validate();
  } catch (const InvalidProblem& e) {
    fail(node, "simulation", e.what());
  }
  s.xi = read_vector(required(node, "xi", "simulation"), p.n, "simulation.xi");
  s.perturbation = node["perturbation"]
                       ? read_vector(node["perturbation"], p.k, "simulation.perturbation")
                       : Vector::Zero(p.k);
  return s;
}

YAML::Emitter& emit(YAML::Emitter& out, const Matrix& m) {
  if (m.rows() == 1 && m.cols() == 1) return out << m(0, 0);
  out << YAML::Flow << YAML::BeginSeq;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << YAML::Flow << YAML::BeginSeq;
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << m(i, j);
    out << YAML::EndSeq;
  }
  return out << YAML::EndSeq;
}

void emit_path(YAML::Emitter& out, const std::vector<Matrix>& samples) {
  bool constant = true;
  for (const auto& s : samples) constant = constant && s == samples.front();
  if (constant) {
    emit(out, samples.front());
    return;
  }
  const bool scalar = samples.front().size() == 1;
  out << (scalar ? YAML::Flow : YAML::Block) << YAML::BeginSeq;
  for (const auto& s : samples) {
    if (scalar) {
      out << s(0, 0);
    } else {
      emit(out, s);
    }
  }
  out << YAML::EndSeq;
}

void emit_vector(YAML::Emitter& out, const Vector& v) {
  out << YAML::Flow << YAML::BeginSeq;
  for (Eigen::Index i = 0; i < v.size(); ++i) out << v(i);
  out << YAML::EndSeq;
}

}  // namespace

ProblemSpec parse_spec(const std::string& text, const std::vector<std::string>& overrides) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw SpecError("spec:" + std::to_string(e.mark.line + 1) + ":" +
                    std::to_string(e.mark.column + 1) + ": " + e.msg);
  }
  if (!root.IsMap()) throw SpecError("spec: top level must be a mapping");
  for (const auto& o : overrides) apply_override(root, o);
  check_keys(root, "", {"dimensions", "horizon", "grid", "coefficients", "terminal",
                        "certificate", "solver", "simulation"});
  ProblemSpec spec;
  spec.data = read_problem(root);
  if (root["solver"]) spec.solver = read_solver(root["solver"]);
  if (root["certificate"]) spec.certificate = read_certificate(root["certificate"], spec.data);
  if (root["simulation"]) spec.simulation = read_simulation(root["simulation"], spec.data);
  return spec;
}

ProblemSpec load_spec(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open spec file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_spec(buf.str(), overrides);
}

std::string dump_spec(const ProblemSpec& spec) {
  const Problem& p = spec.data;
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "dimensions" << YAML::Value << YAML::Flow << YAML::BeginMap
      << YAML::Key << "n" << YAML::Value << p.n << YAML::Key << "k" << YAML::Value << p.k
      << YAML::Key << "d" << YAML::Value << p.d << YAML::EndMap;
  out << YAML::Key << "horizon" << YAML::Value << p.horizon;
  out << YAML::Key << "grid" << YAML::Value << YAML::BeginMap << YAML::Key << "points"
      << YAML::Value << p.intervals() + 1 << YAML::Key << "interpolation" << YAML::Value
      << to_string(p.A.interpolation()) << YAML::EndMap;
  out << YAML::Key << "coefficients" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "A" << YAML::Value;
  emit_path(out, p.A.samples());
  out << YAML::Key << "B" << YAML::Value;
  emit_path(out, p.B.samples());
  if (p.d > 0) {
    out << YAML::Key << "C" << YAML::Value << YAML::BeginSeq;
    for (const auto& c : p.C) emit_path(out, c.samples());
    out << YAML::EndSeq;
    out << YAML::Key << "D" << YAML::Value << YAML::BeginSeq;
    for (const auto& d : p.D) emit_path(out, d.samples());
    out << YAML::EndSeq;
  }
  out << YAML::Key << "R" << YAML::Value;
  emit_path(out, p.R.samples());
  out << YAML::Key << "Q" << YAML::Value;
  emit_path(out, p.Q.samples());
  out << YAML::EndMap;
  out << YAML::Key << "terminal" << YAML::Value;
  emit(out, p.N);

  const SolverConfig& s = spec.solver;
  out << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "rel_tol" << YAML::Value << s.rel_tol;
  out << YAML::Key << "abs_tol" << YAML::Value << s.abs_tol;
  out << YAML::Key << "max_norm" << YAML::Value << s.max_norm;
  out << YAML::Key << "eps_pos" << YAML::Value << s.eps_pos;
  out << YAML::Key << "max_steps" << YAML::Value << s.max_steps;
  out << YAML::Key << "output_points" << YAML::Value << s.output_points;
  out << YAML::EndMap;

  if (spec.certificate) {
    const CertificateSpec& c = *spec.certificate;
    out << YAML::Key << "certificate" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << c.kind;
    if (const auto* v = std::get_if<double>(&c.alpha)) {
      out << YAML::Key << "alpha" << YAML::Value << *v;
    } else if (const auto* name = std::get_if<std::string>(&c.alpha)) {
      out << YAML::Key << "alpha" << YAML::Value << *name;
    } else if (const auto* samples = std::get_if<std::vector<double>>(&c.alpha)) {
      out << YAML::Key << "alpha" << YAML::Value << YAML::Flow << *samples;
    }
    const std::pair<const char*, const std::vector<Matrix>*> mats[] = {
        {"K", &c.K}, {"dK", &c.dK}, {"F", &c.F}, {"dF", &c.dF}};
    for (const auto& [key, m] : mats) {
      if (m->empty()) continue;
      out << YAML::Key << key << YAML::Value;
      emit_path(out, *m);
    }
    if (c.tol) out << YAML::Key << "tol" << YAML::Value << *c.tol;
    out << YAML::EndMap;
  }

  if (spec.simulation) {
    const SimulationSpec& sim = *spec.simulation;
    out << YAML::Key << "simulation" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "n_paths" << YAML::Value << sim.config.n_paths;
    out << YAML::Key << "n_steps" << YAML::Value << sim.config.n_steps;
    out << YAML::Key << "seed" << YAML::Value << sim.config.seed;
    out << YAML::Key << "antithetic" << YAML::Value << sim.config.antithetic;
    out << YAML::Key << "threads" << YAML::Value << sim.config.threads;
    out << YAML::Key << "xi" << YAML::Value;
    emit_vector(out, sim.xi);
    out << YAML::Key << "perturbation" << YAML::Value;
    emit_vector(out, sim.perturbation);
    out << YAML::EndMap;
  }
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace lqsre

#include <lqsre/certificates.hpp>

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>

namespace lqsre {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <typename T>
T lerp_path(const std::vector<double>& times, const std::vector<T>& values,
            double t) {
  if (times.empty()) throw Error("empty path");
  if (t <= times.front()) return values.front();
  if (t >= times.back()) return values.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t j = std::size_t(it - times.begin()) - 1;
  const double w = (t - times[j]) / (times[j + 1] - times[j]);
  return T((1 - w) * values[j] + w * values[j + 1]);
}

Matrix sum_DtD(const Coefficients<double>& c) {
  Matrix s = Matrix::Zero(c.k(), c.k());
  for (const auto& Di : c.D) s.noalias() += Di.transpose() * Di;
  return 0.5 * (s + s.transpose());
}

double max_eigenvalue(const Matrix& m) { return -min_eigenvalue(Matrix(-m)); }

std::vector<double> grid_times(const Problem& data) {
  std::vector<double> t(std::size_t(data.intervals()) + 1);
  for (int j = 0; j <= data.intervals(); ++j) t[std::size_t(j)] = data.time(j);
  return t;
}

// ∫_a^b g under r = a + (b - a)(3u² - 2u³): the Jacobian vanishes at both
// ends, which absorbs integrable (r - a)^{-1/2} endpoint singularities, and
// the open Gauss rule never evaluates the endpoints themselves.
template <typename F>
double regularized_integral(const F& g, double a, double b) {
  if (b <= a) return 0.0;
  const double L = b - a;
  return boost::math::quadrature::gauss<double, 8>::integrate(
      [&](double u) {
        const double r = a + L * u * u * (3 - 2 * u);
        return g(r) * L * 6 * u * (1 - u);
      },
      0.0, 1.0);
}

}  // namespace

double ScalarPath::operator()(double t) const {
  return lerp_path(times, values, t);
}

Matrix MatrixPath::operator()(double t) const {
  return lerp_path(times, values, t);
}

std::string to_string(CertificateKind kind) {
  switch (kind) {
    case CertificateKind::kTheorem32:
      return "theorem-3.2";
    case CertificateKind::kCorollary31i:
      return "corollary-3.1-i";
    case CertificateKind::kCorollary31ii:
      return "corollary-3.1-ii";
    case CertificateKind::kExplicitSubsolution:
      return "explicit-subsolution";
    case CertificateKind::kShift:
      return "shift";
  }
  return "unknown";
}

std::string to_string(FailureReason reason) {
  switch (reason) {
    case FailureReason::kNone:
      return "none";
    case FailureReason::kConstraint:
      return "constraint";
    case FailureReason::kResidual:
      return "residual";
    case FailureReason::kTerminal:
      return "terminal";
    case FailureReason::kZeroMargin:
      return "zero-margin";
    case FailureReason::kPhiNonpositive:
      return "phi-nonpositive";
    case FailureReason::kCorollaryConditions:
      return "corollary-conditions";
    case FailureReason::kShiftResidual:
      return "shift-residual";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Candidates

SubsolutionCandidate SubsolutionCandidate::Zero(const Problem& data) {
  SubsolutionCandidate c;
  c.horizon = data.horizon;
  c.F.assign(std::size_t(data.intervals()) + 1, Matrix::Zero(data.n, data.n));
  c.dF = c.F;
  c.source = Source::kZero;
  return c;
}

SubsolutionCandidate SubsolutionCandidate::FromSamples(double horizon,
                                                       std::vector<Matrix> F,
                                                       std::vector<Matrix> dF) {
  if (F.size() < 2 || F.size() != dF.size()) {
    throw GridMismatch("F and dF must share a grid of at least two points");
  }
  for (std::size_t j = 0; j < F.size(); ++j) {
    if ((F[j] - F[j].transpose()).norm() > 1e-10 * (1 + F[j].norm()) ||
        (dF[j] - dF[j].transpose()).norm() > 1e-10 * (1 + dF[j].norm())) {
      throw InvalidProblem("subsolution samples must be symmetric");
    }
    F[j] = 0.5 * (F[j] + F[j].transpose());
    dF[j] = 0.5 * (dF[j] + dF[j].transpose());
  }
  SubsolutionCandidate c;
  c.horizon = horizon;
  c.F = std::move(F);
  c.dF = std::move(dF);
  return c;
}

SubsolutionCandidate SubsolutionCandidate::FromSamples(double horizon,
                                                       std::vector<Matrix> F) {
  const std::size_t m = F.size();
  if (m < 3) throw GridMismatch("differencing F needs at least three points");
  const double h = horizon / double(m - 1);
  std::vector<Matrix> dF(m);
  dF[0] = (-3 * F[0] + 4 * F[1] - F[2]) / (2 * h);
  dF[m - 1] = (3 * F[m - 1] - 4 * F[m - 2] + F[m - 3]) / (2 * h);
  for (std::size_t j = 1; j + 1 < m; ++j) dF[j] = (F[j + 1] - F[j - 1]) / (2 * h);
  auto c = FromSamples(horizon, std::move(F), std::move(dF));
  c.differenced = true;
  return c;
}

// ---------------------------------------------------------------------------
// Subsolution check

namespace {

struct SubsolutionScan {
  bool ok = true;
  FailureReason reason = FailureReason::kNone;
  double t_worst = kNaN;
  double worst = std::numeric_limits<double>::infinity();
  double min_hat_R = std::numeric_limits<double>::infinity();
};

// Checks the inequalities for the weight R - shift * I at every grid point.
SubsolutionScan scan_subsolution(const SubsolutionCandidate& cand,
                                 const Problem& data,
                                 const std::vector<Coefficients<double>>& coeffs,
                                 double shift, double tol, double eps_pos) {
  SubsolutionScan s;
  const int m = data.intervals();
  for (int j = 0; j <= m; ++j) {
    const auto& c = coeffs[std::size_t(j)];
    const Matrix& F = cand.F[std::size_t(j)];
    Coefficients<double> shifted = c;
    shifted.R -= shift * Matrix::Identity(data.k, data.k);
    const Symmetric hat_R = eval_hat_R(F, shifted);
    const double margin = min_eigenvalue(hat_R.matrix());
    s.min_hat_R = std::min(s.min_hat_R, margin);
    if (margin < eps_pos) {
      if (s.reason != FailureReason::kConstraint || margin < s.worst) {
        s.worst = margin;
        s.t_worst = data.time(j);
      }
      s.ok = false;
      s.reason = FailureReason::kConstraint;
      continue;
    }
    if (s.reason == FailureReason::kConstraint) continue;
    // Positive margin here, so the evaluator does not throw.
    const Matrix drift =
        cand.dF[std::size_t(j)] +
        eval_terms<double>(F, {}, shifted, std::min(eps_pos, 0.5 * margin))
            .f.matrix();
    const double residual = min_eigenvalue(Matrix(0.5 * (drift + drift.transpose())));
    if (residual < -tol) {
      if (s.reason != FailureReason::kResidual || residual < s.worst) {
        s.worst = residual;
        s.t_worst = data.time(j);
      }
      s.ok = false;
      s.reason = FailureReason::kResidual;
    }
  }
  if (s.ok) {
    const Matrix gap = data.N - cand.F.back();
    const double terminal = min_eigenvalue(Matrix(0.5 * (gap + gap.transpose())));
    if (terminal < -tol) {
      s.ok = false;
      s.reason = FailureReason::kTerminal;
      s.t_worst = data.horizon;
      s.worst = terminal;
    }
  }
  return s;
}

}  // namespace

Certificate check_subsolution(const SubsolutionCandidate& candidate,
                              const Problem& data, double tol, double eps_pos) {
  data.Validate();
  const int m = data.intervals();
  if (int(candidate.F.size()) != m + 1 || int(candidate.dF.size()) != m + 1 ||
      std::abs(candidate.horizon - data.horizon) > 1e-12 * data.horizon) {
    throw GridMismatch("subsolution candidate grid differs from the problem grid");
  }
  for (std::size_t j = 0; j < candidate.F.size(); ++j) {
    if (candidate.F[j].rows() != data.n || candidate.F[j].cols() != data.n ||
        candidate.dF[j].rows() != data.n || candidate.dF[j].cols() != data.n) {
      throw GridMismatch("subsolution candidate samples must be n x n");
    }
  }
  const double eff_tol = candidate.differenced ? 10 * tol : tol;

  std::vector<Coefficients<double>> coeffs;
  coeffs.reserve(std::size_t(m) + 1);
  for (int j = 0; j <= m; ++j) coeffs.push_back(data.At(data.time(j)));

  Certificate cert;
  cert.kind = CertificateKind::kExplicitSubsolution;
  cert.witness.times = grid_times(data);
  cert.witness.values = candidate.F;

  const SubsolutionScan base = scan_subsolution(candidate, data, coeffs, 0.0, eff_tol, eps_pos);
  if (!base.ok) {
    cert.reason = base.reason;
    cert.t_worst = base.t_worst;
    return cert;
  }

  // Largest shift keeping F a subsolution for R - shift * I; the
  // inequalities are monotone in the shift.
  const double upper = base.min_hat_R - eps_pos;
  double lo = 0;
  if (upper > 0) {
    if (scan_subsolution(candidate, data, coeffs, upper, eff_tol, eps_pos).ok) {
      lo = upper;
    } else {
      double hi = upper;
      while (hi - lo > 1e-6 * hi) {
        const double mid = 0.5 * (lo + hi);
        if (scan_subsolution(candidate, data, coeffs, mid, eff_tol, eps_pos).ok) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
    }
  }
  cert.epsilon = lo;
  if (lo > 0) {
    cert.certified = true;
  } else {
    cert.reason = FailureReason::kZeroMargin;
  }
  return cert;
}

// ---------------------------------------------------------------------------
// Scalar-φ certificate

double solve_alpha_log_equation(double c) {
  if (!(c >= 1)) throw InvalidProblem("alpha - ln(alpha) = c needs c >= 1");
  if (c == 1) return 1.0;
  // α - ln α is decreasing on (0, 1]; α = exp(α - c) >= exp(-c).
  double lo = std::exp(-c), hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid - std::log(mid) > c) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double a = 0.5 * (lo + hi);
  for (int it = 0; it < 3; ++it) {
    const double step = (a - std::log(a) - c) / (1 - 1 / a);
    if (!std::isfinite(step)) break;
    const double next = a - step;
    if (next <= lo || next >= hi) break;
    a = next;
  }
  return a;
}

BenchmarkThreshold example_504_threshold() {
  const double alpha = solve_alpha_log_equation(2.0);
  return {alpha, -alpha};
}

AlphaSchedule AlphaSchedule::Constant(double value) {
  if (!(value >= 0 && value < 1)) throw InvalidProblem("alpha must lie in [0, 1)");
  AlphaSchedule s;
  s.fn_ = [value](double) { return value; };
  s.name_ = "constant";
  s.constant_ = value;
  return s;
}

AlphaSchedule AlphaSchedule::Sampled(ScalarPath path) {
  if (path.times.size() < 2 || path.times.size() != path.values.size()) {
    throw InvalidProblem("alpha samples need a grid of at least two points");
  }
  for (double v : path.values) {
    if (!(v >= 0 && v < 1)) throw InvalidProblem("alpha samples must lie in [0, 1)");
  }
  AlphaSchedule s;
  s.samples_ = path;
  s.fn_ = [p = std::move(path)](double t) { return p(t); };
  s.name_ = "sampled";
  return s;
}

AlphaSchedule AlphaSchedule::OptimalBenchmark() {
  AlphaSchedule s;
  s.fn_ = [](double t) { return solve_alpha_log_equation(1 + std::max(t, 0.0)); };
  s.name_ = "optimal-504";
  return s;
}

Certificate certify_theorem_3_2(const Problem& data, const AlphaSchedule& alpha,
                                double eps_pos) {
  data.Validate();
  const int m = data.intervals();
  const int per = std::max(4, (256 + m - 1) / m);
  const int panels = m * per;
  const double T = data.horizon;
  auto node = [&](int j) { return j == panels ? T : T * double(j) / double(panels); };

  // λ_min(Υ(α)) at time r on a fixed coefficient segment.
  auto upsilon_min = [&](double r, int seg) {
    const Coefficients<double> c = data.At(r, seg);
    const double a = alpha(r);
    Matrix M = c.B;
    Matrix U = c.A.transpose() + c.A;
    for (int i = 0; i < c.d(); ++i) {
      M.noalias() += c.C[std::size_t(i)].transpose() * c.D[std::size_t(i)];
      U.noalias() += c.C[std::size_t(i)].transpose() * c.C[std::size_t(i)];
    }
    U -= (1 / (1 - a)) * (M * sum_DtD(c).llt().solve(M.transpose()));
    return min_eigenvalue(Matrix(0.5 * (U + U.transpose())));
  };
  auto q_min = [&](double r, int seg) { return min_eigenvalue(data.At(r, seg).Q); };

  // Preconditions and α range at every node.
  std::vector<double> alphas(std::size_t(panels) + 1);
  for (int j = 0; j <= panels; ++j) {
    const double t = node(j);
    const Coefficients<double> c = data.At(t);
    if (min_eigenvalue(sum_DtD(c)) < eps_pos) {
      throw PreconditionFailed("sum_i D_i'D_i is not uniformly positive (t = " +
                               std::to_string(t) + ")");
    }
    const double a = alpha(t);
    const bool in_range = j == 0 ? (a >= 0 && a <= 1) : (a >= 0 && a < 1);
    if (!in_range) {
      throw InvalidProblem("alpha(" + std::to_string(t) + ") = " +
                           std::to_string(a) + " outside [0, 1)");
    }
    alphas[std::size_t(j)] = a;
  }

  // Backward sweep: φ_j = Φ(t_j, t_{j+1}) φ_{j+1} + ∫ Φ(t_j, s) q(s) ds.
  std::vector<double> phi(std::size_t(panels) + 1);
  phi.back() = min_eigenvalue(data.N);
  for (int j = panels - 1; j >= 0; --j) {
    const double a = node(j), b = node(j + 1);
    const int seg = data.segment(0.5 * (a + b));
    auto g = [&](double r) { return upsilon_min(r, seg); };
    const double transfer = std::exp(regularized_integral(g, a, b));
    double forcing = 0;
    const bool q_zero = q_min(a, seg) == 0 && q_min(b, seg) == 0 &&
                        q_min(0.5 * (a + b), seg) == 0;
    if (!q_zero) {
      forcing = regularized_integral(
          [&](double s) {
            return std::exp(regularized_integral(g, a, s)) * q_min(s, seg);
          },
          a, b);
    }
    phi[std::size_t(j)] = transfer * phi[std::size_t(j) + 1] + forcing;
  }

  Certificate cert;
  cert.kind = CertificateKind::kTheorem32;
  ScalarPath phi_path, alpha_path;
  MatrixPath boundary;
  cert.witness.times.reserve(std::size_t(panels) + 1);
  double eps = std::numeric_limits<double>::infinity();
  double t_eps = 0;
  double threshold = -std::numeric_limits<double>::infinity();
  double last_nonpositive = kNaN;
  for (int j = 0; j <= panels; ++j) {
    const double t = node(j);
    const Coefficients<double> c = data.At(t);
    const double p = phi[std::size_t(j)];
    const double a = alphas[std::size_t(j)];
    const Matrix bound = -a * p * sum_DtD(c);
    const double margin = min_eigenvalue(Matrix(c.R - bound));
    if (margin < eps) {
      eps = margin;
      t_eps = t;
    }
    threshold = std::max(threshold, max_eigenvalue(bound));
    if (!(p > 0)) last_nonpositive = t;
    phi_path.times.push_back(t);
    phi_path.values.push_back(p);
    alpha_path.times.push_back(t);
    alpha_path.values.push_back(a);
    boundary.times.push_back(t);
    boundary.values.push_back(bound);
    cert.witness.times.push_back(t);
    cert.witness.values.push_back(p * Matrix::Identity(data.n, data.n));
  }
  cert.phi = std::move(phi_path);
  cert.alpha = std::move(alpha_path);
  cert.boundary = std::move(boundary);
  cert.threshold = threshold;
  cert.epsilon = std::max(eps, 0.0);
  if (!std::isnan(last_nonpositive)) {
    cert.reason = FailureReason::kPhiNonpositive;
    cert.t_worst = last_nonpositive;
    cert.epsilon = 0;
  } else if (eps > eps_pos) {
    cert.certified = true;
  } else {
    cert.reason = FailureReason::kConstraint;
    cert.t_worst = t_eps;
  }
  return cert;
}

// ---------------------------------------------------------------------------
// Classical cases

Certificate certify_corollary_3_1(const Problem& data, double eps_pos,
                                  double alpha) {
  data.Validate();
  const int m = data.intervals();
  // Linear interpolation preserves these eigenvalue bounds between samples.
  double min_R = std::numeric_limits<double>::infinity();
  double min_Q = min_R, min_DtD = min_R;
  for (int j = 0; j <= m; ++j) {
    const Coefficients<double> c = data.At(data.time(j));
    min_R = std::min(min_R, min_eigenvalue(c.R));
    min_Q = std::min(min_Q, min_eigenvalue(c.Q));
    min_DtD = std::min(min_DtD, min_eigenvalue(sum_DtD(c)));
  }
  const double min_N = min_eigenvalue(data.N);
  const double psd_slack = 1e-12;

  if (min_R >= eps_pos && min_Q >= -psd_slack && min_N >= -psd_slack) {
    Certificate cert = check_subsolution(SubsolutionCandidate::Zero(data), data,
                                         1e-9, eps_pos);
    cert.kind = CertificateKind::kCorollary31i;
    if (cert.certified) return cert;
  }
  if (min_N >= eps_pos && min_DtD >= eps_pos && min_Q >= -psd_slack &&
      min_R >= -psd_slack) {
    Certificate cert = certify_theorem_3_2(data, AlphaSchedule::Constant(alpha), eps_pos);
    cert.kind = CertificateKind::kCorollary31ii;
    return cert;
  }
  Certificate cert;
  cert.kind = CertificateKind::kCorollary31i;
  cert.reason = FailureReason::kCorollaryConditions;
  cert.witness.times = grid_times(data);
  cert.witness.values.assign(cert.witness.times.size(), Matrix::Zero(data.n, data.n));
  return cert;
}

// ---------------------------------------------------------------------------
// Shift

ShiftResult apply_shift(const Problem& data, const std::vector<Matrix>& K,
                        const std::vector<Matrix>& dK) {
  data.Validate();
  const int m = data.intervals();
  if (int(K.size()) != m + 1 || int(dK.size()) != m + 1) {
    throw GridMismatch("K and dK must be sampled on the problem grid");
  }
  ShiftResult out{data, 0.0};
  std::vector<Matrix> Q = data.Q.samples();
  std::vector<Matrix> R = data.R.samples();
  for (int j = 0; j <= m; ++j) {
    const std::size_t js = std::size_t(j);
    const Matrix& Kj = K[js];
    if (Kj.rows() != data.n || Kj.cols() != data.n || dK[js].rows() != data.n ||
        dK[js].cols() != data.n) {
      throw GridMismatch("K and dK samples must be n x n");
    }
    const Matrix& A = data.A.samples()[js];
    const Matrix& B = data.B.samples()[js];
    Matrix q = dK[js] + A.transpose() * Kj + Kj * A;
    Matrix r = Matrix::Zero(data.k, data.k);
    Matrix defect = Kj * B;
    for (int i = 0; i < data.d; ++i) {
      const Matrix& Ci = data.C[std::size_t(i)].samples()[js];
      const Matrix& Di = data.D[std::size_t(i)].samples()[js];
      q.noalias() += Ci.transpose() * Kj * Ci;
      r.noalias() += Di.transpose() * Kj * Di;
      defect.noalias() += Ci.transpose() * Kj * Di;
    }
    Q[js] += 0.5 * (q + q.transpose());
    R[js] += 0.5 * (r + r.transpose());
    out.residual = std::max(out.residual, defect.norm());
  }
  const Interpolation interp = data.interpolation();
  out.data.Q = Path(data.horizon, std::move(Q), interp);
  out.data.R = Path(data.horizon, std::move(R), interp);
  const Matrix NT = data.N - K.back();
  out.data.N = 0.5 * (NT + NT.transpose());
  return out;
}

Certificate certify_shift(const Problem& data, const std::vector<Matrix>& K,
                          const std::vector<Matrix>& dK, double tol,
                          double eps_pos) {
  const ShiftResult shifted = apply_shift(data, K, dK);
  Certificate cert;
  if (shifted.residual > tol) {
    cert.kind = CertificateKind::kShift;
    cert.reason = FailureReason::kShiftResidual;
    cert.witness.times = grid_times(data);
    cert.witness.values = K;
    return cert;
  }
  cert = certify_corollary_3_1(shifted.data, eps_pos);
  cert.kind = CertificateKind::kShift;
  const std::vector<double> grid = grid_times(data);
  for (std::size_t j = 0; j < cert.witness.times.size(); ++j) {
    cert.witness.values[j] += lerp_path(grid, K, cert.witness.times[j]);
  }
  return cert;
}

}  // namespace lqsre

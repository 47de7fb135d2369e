#include <lqsre/riccati.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace lqsre {

void SolverConfig::Validate() const {
  if (!(rel_tol > 0) || !(abs_tol > 0) || !(max_norm > 0) || !(eps_pos > 0)) {
    throw InvalidProblem("solver tolerances must be positive");
  }
  if (max_steps < 1) throw InvalidProblem("solver max_steps must be positive");
  if (output_points < 2) throw InvalidProblem("solver output_points must be >= 2");
}

std::string to_string(RiccatiStatus status) {
  switch (status) {
    case RiccatiStatus::kCompleted:
      return "Completed";
    case RiccatiStatus::kConstraintViolation:
      return "ConstraintViolation";
    case RiccatiStatus::kBlowup:
      return "Blowup";
    case RiccatiStatus::kStepLimit:
      return "StepLimit";
  }
  return "Unknown";
}

namespace {

Matrix interpolate(const std::vector<double>& times,
                   const std::vector<Matrix>& values, double t) {
  if (times.empty()) throw Error("empty solution path");
  if (t <= times.front()) return values.front();
  if (t >= times.back()) return values.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t j = std::size_t(it - times.begin()) - 1;
  const double w = (t - times[j]) / (times[j + 1] - times[j]);
  return (1 - w) * values[j] + w * values[j + 1];
}

// Dormand-Prince 5(4).
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

struct RhsValue {
  Matrix f;  // dP/ds = f(P, 0) in reversed time
  double margin = 0;
  bool ok = false;
  bool constraint_failed = false;
};

enum class Violation { kNone, kConstraint, kBlowup };

class Integrator {
 public:
  Integrator(const Problem& data, const SolverConfig& config)
      : data_(data), config_(config) {}

  RhsValue rhs(double t, int seg, const Matrix& P) const {
    RhsValue v;
    if (!P.allFinite()) return v;
    try {
      auto terms = eval_terms<double>(P, {}, data_.At(t, seg), config_.eps_pos, t);
      v.f = terms.f.matrix();
      v.margin = terms.margin;
      v.ok = v.f.allFinite();
    } catch (const ConstraintViolation& e) {
      v.margin = e.margin();
      v.constraint_failed = true;
    }
    return v;
  }

  struct Trial {
    Matrix P;
    RhsValue end;  // f at the new point (FSAL)
    double err = 0;
    bool stage_failed = false;
    bool stage_constraint = false;
  };

  // One step from t down to t - h.
  Trial step(double t, const Matrix& P, const Matrix& k1, double h,
             int seg) const {
    Trial out;
    auto stage = [&](double c, const Matrix& y) -> std::optional<Matrix> {
      RhsValue v = rhs(t - c * h, seg, y);
      if (!v.ok) {
        out.stage_failed = true;
        out.stage_constraint = v.constraint_failed;
        return std::nullopt;
      }
      return std::move(v.f);
    };
    auto k2 = stage(c2, P + h * (a21 * k1));
    if (!k2) return out;
    auto k3 = stage(c3, P + h * (a31 * k1 + a32 * *k2));
    if (!k3) return out;
    auto k4 = stage(c4, P + h * (a41 * k1 + a42 * *k2 + a43 * *k3));
    if (!k4) return out;
    auto k5 = stage(c5, P + h * (a51 * k1 + a52 * *k2 + a53 * *k3 + a54 * *k4));
    if (!k5) return out;
    auto k6 = stage(1.0, P + h * (a61 * k1 + a62 * *k2 + a63 * *k3 +
                                  a64 * *k4 + a65 * *k5));
    if (!k6) return out;
    Matrix y = P + h * (b1 * k1 + b3 * *k3 + b4 * *k4 + b5 * *k5 + b6 * *k6);
    out.P = 0.5 * (y + y.transpose());
    out.end = rhs(t - h, seg, out.P);
    if (!out.end.ok) {
      out.stage_failed = true;
      out.stage_constraint = out.end.constraint_failed;
      return out;
    }
    const Matrix err = h * (e1 * k1 + e3 * *k3 + e4 * *k4 + e5 * *k5 +
                            e6 * *k6 + e7 * out.end.f);
    double acc = 0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
      const double scale =
          config_.abs_tol + config_.rel_tol * std::max(std::abs(P(i)),
                                                       std::abs(out.P(i)));
      acc += (err(i) / scale) * (err(i) / scale);
    }
    out.err = std::sqrt(acc / double(err.size()));
    return out;
  }

  Violation endpoint_violation(const Matrix& P, const RhsValue& v) const {
    if (!v.ok) return v.constraint_failed ? Violation::kConstraint : Violation::kBlowup;
    if (v.margin <= config_.eps_pos) return Violation::kConstraint;
    if (!(P.norm() <= config_.max_norm) || !(v.f.norm() <= config_.max_norm)) {
      return Violation::kBlowup;
    }
    return Violation::kNone;
  }

  Violation trial_violation(const Trial& trial) const {
    if (trial.stage_failed) {
      return trial.stage_constraint ? Violation::kConstraint : Violation::kBlowup;
    }
    return endpoint_violation(trial.P, trial.end);
  }

  // Bisects on the fraction of the step at which a violation first shows.
  std::pair<double, Violation> localize(double t, const Matrix& P,
                                        const Matrix& k1, double h,
                                        int seg) const {
    const double bracket = 0.5e-6 * data_.horizon;
    double lo = 0, hi = 1;
    Violation kind = trial_violation(step(t, P, k1, h, seg));
    if (kind == Violation::kNone) kind = Violation::kBlowup;
    while ((hi - lo) * h > bracket) {
      const double mid = 0.5 * (lo + hi);
      const Violation v = trial_violation(step(t, P, k1, mid * h, seg));
      if (v == Violation::kNone) {
        lo = mid;
      } else {
        hi = mid;
        kind = v;
      }
    }
    return {t - hi * h, kind};
  }

 private:
  const Problem& data_;
  const SolverConfig& config_;
};

}  // namespace

Matrix RiccatiSolution::P_at(double t) const { return interpolate(times, P, t); }

Matrix RiccatiSolution::gain_at(double t) const {
  return interpolate(times, gain, t);
}

RiccatiSolution solve_riccati(const Problem& data, const SolverConfig& config) {
  data.Validate();
  config.Validate();
  const double T = data.horizon;
  const int n_out = config.output_points;

  std::vector<double> output_times(static_cast<std::size_t>(n_out));
  for (int i = 0; i < n_out; ++i) {
    output_times[std::size_t(i)] = i == n_out - 1 ? T : T * double(i) / double(n_out - 1);
  }
  std::vector<double> breaks = output_times;
  for (int j = 0; j <= data.intervals(); ++j) breaks.push_back(data.time(j));
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end(),
                           [&](double a, double b) { return b - a <= 1e-12 * T; }),
               breaks.end());
  breaks.front() = 0;
  breaks.back() = T;

  Integrator integ(data, config);
  RiccatiSolution sol;
  sol.stats.min_margin = std::numeric_limits<double>::infinity();

  // Stored in descending order while integrating, reversed at the end.
  int next_out = n_out - 1;
  auto store = [&](double t, const Matrix& P) {
    while (next_out >= 0 && output_times[std::size_t(next_out)] > t + 1e-12 * T) {
      --next_out;
    }
    if (next_out < 0 || std::abs(output_times[std::size_t(next_out)] - t) > 1e-12 * T) {
      return;
    }
    const double to = output_times[std::size_t(next_out)];
    const Coefficients<double> c = data.At(to);
    const Symmetric hat_R = eval_hat_R(P, c);
    const double margin = min_eigenvalue(hat_R.matrix());
    Matrix gain = Matrix::Constant(data.k, data.n,
                                   std::numeric_limits<double>::quiet_NaN());
    if (margin > config.eps_pos) gain = eval_gamma<double>(P, {}, c, config.eps_pos);
    sol.times.push_back(to);
    sol.P.push_back(P);
    sol.gain.push_back(gain);
    sol.margin.push_back(margin);
    --next_out;
  };
  auto finish = [&](RiccatiStatus status, double t_star) {
    sol.status = status;
    sol.t_star = t_star;
    std::reverse(sol.times.begin(), sol.times.end());
    std::reverse(sol.P.begin(), sol.P.end());
    std::reverse(sol.gain.begin(), sol.gain.end());
    std::reverse(sol.margin.begin(), sol.margin.end());
    return sol;
  };
  auto status_of = [](Violation v) {
    return v == Violation::kConstraint ? RiccatiStatus::kConstraintViolation
                                       : RiccatiStatus::kBlowup;
  };

  Matrix P = 0.5 * (data.N + data.N.transpose());
  double t = T;
  const double h_min = 1e-9 * T;
  double h = T / 100;
  double err_old = 1e-4;
  long steps = 0;

  {
    // Terminal point, evaluated on the last segment.
    const int seg = data.intervals() - 1;
    RhsValue v = integ.rhs(T, seg, P);
    const Violation viol = integ.endpoint_violation(P, v);
    if (viol != Violation::kNone) return finish(status_of(viol), T);
    sol.stats.min_margin = v.margin;
  }
  store(T, P);

  for (std::size_t b = breaks.size() - 1; b > 0; --b) {
    const double t_lo = breaks[b - 1];
    const int seg = data.segment(0.5 * (breaks[b - 1] + breaks[b]));
    RhsValue start = integ.rhs(t, seg, P);
    if (integ.endpoint_violation(P, start) != Violation::kNone) {
      // Coefficients jump at a kink: the one-sided limit already violates.
      Matrix k1 = start.ok ? start.f : Matrix::Zero(data.n, data.n);
      auto [t_star, kind] = integ.localize(t, P, k1, std::min(h, t - t_lo), seg);
      return finish(status_of(kind), t_star);
    }
    Matrix k1 = start.f;
    while (t > t_lo) {
      if (++steps > config.max_steps) return finish(RiccatiStatus::kStepLimit, t);
      h = std::min(h, t - t_lo);
      if (t - h - t_lo < 1e-12 * T) h = t - t_lo;

      Integrator::Trial trial = integ.step(t, P, k1, h, seg);
      if (trial.stage_failed || !(trial.err <= 1.0)) {
        ++sol.stats.rejected;
        if (h <= h_min) {
          const Violation v = trial.stage_failed && trial.stage_constraint
                                  ? Violation::kConstraint
                                  : Violation::kBlowup;
          return finish(status_of(v), t);
        }
        if (trial.stage_failed || !std::isfinite(trial.err)) {
          h *= 0.25;
        } else {
          h *= std::clamp(0.9 * std::pow(trial.err, -0.2), 0.2, 1.0);
        }
        continue;
      }
      if (integ.endpoint_violation(trial.P, trial.end) != Violation::kNone) {
        auto [t_star, kind] = integ.localize(t, P, k1, h, seg);
        return finish(status_of(kind), t_star);
      }
      ++sol.stats.accepted;
      sol.stats.min_margin = std::min(sol.stats.min_margin, trial.end.margin);
      t = t - h - t_lo <= 1e-12 * T ? t_lo : t - h;
      P = std::move(trial.P);
      k1 = std::move(trial.end.f);
      const double err = std::max(trial.err, 1e-10);
      const double fac = 0.9 * std::pow(err, -0.17) * std::pow(err_old, 0.04);
      err_old = err;
      h *= std::clamp(fac, 0.2, 5.0);
    }
    t = t_lo;
    store(t, P);
  }
  return finish(RiccatiStatus::kCompleted, 0);
}

double check_solution_residual(const RiccatiSolution& solution,
                               const Problem& data, int probe_points,
                               double eps_pos) {
  if (!solution.completed()) {
    throw PreconditionFailed("residual check needs a completed solution");
  }
  const int m = int(solution.times.size());
  if (m < 5) throw PreconditionFailed("residual check needs >= 5 points");
  // Fourth-order weights (times 12h) for the derivative at offset o of a
  // five-point window.
  static constexpr double kWeights[5][5] = {{-25, 48, -36, 16, -3},
                                            {-3, -10, 18, -6, 1},
                                            {1, -8, 0, 8, -1},
                                            {-1, 6, -18, 10, 3},
                                            {3, -16, 36, -48, 25}};
  const double T = data.horizon;
  const auto& ts = solution.times;
  // A window is usable when no coefficient breakpoint lies strictly inside
  // it; P'' jumps there.
  auto kink_free = [&](int s) {
    const int j0 = data.segment(ts[std::size_t(s)]);
    return data.time(j0 + 1) >= ts[std::size_t(s) + 4] - 1e-12 * T;
  };
  probe_points = std::clamp(probe_points, 1, m);
  double worst = 0;
  for (int p = 0; p < probe_points; ++p) {
    const int i = probe_points == 1
                      ? m / 2
                      : int(std::lround(double(p) * double(m - 1) / double(probe_points - 1)));
    int start = std::clamp(i - 2, 0, m - 5);
    for (int shift = 0; shift <= 4; ++shift) {
      const int lo = std::clamp(i - 2 - shift, 0, m - 5);
      const int hi = std::clamp(i - 2 + shift, 0, m - 5);
      if (lo <= i && i <= lo + 4 && kink_free(lo)) {
        start = lo;
        break;
      }
      if (hi <= i && i <= hi + 4 && kink_free(hi)) {
        start = hi;
        break;
      }
    }
    const int o = i - start;
    const double h = (ts[std::size_t(start) + 4] - ts[std::size_t(start)]) / 4;
    Matrix dP = Matrix::Zero(data.n, data.n);
    for (int q = 0; q < 5; ++q) dP += kWeights[o][q] * solution.P[std::size_t(start + q)];
    dP /= 12 * h;
    const double t = ts[std::size_t(i)];
    // One-sided coefficient limit matching the window.
    const int seg = data.segment(0.5 * (ts[std::size_t(start)] + ts[std::size_t(start) + 4]));
    const Matrix f =
        eval_terms<double>(solution.P[std::size_t(i)], {}, data.At(t, seg), eps_pos, t).f.matrix();
    worst = std::max(worst, (dP + f).norm());
  }
  return worst;
}

}  // namespace lqsre

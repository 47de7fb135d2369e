#include <lqsre/simulate.hpp>

#include <algorithm>
#include <cmath>
#include <exception>
#include <random>
#include <thread>
#include <vector>

namespace lqsre {

void SimConfig::Validate() const {
  if (n_paths < 1) throw InvalidProblem("simulation n_paths must be >= 1");
  if (n_steps < 1) throw InvalidProblem("simulation n_steps must be >= 1");
  if (threads < 0) throw InvalidProblem("simulation threads must be >= 0");
}

ControlPolicy ControlPolicy::Zero() { return {}; }

ControlPolicy ControlPolicy::FeedbackGain(std::function<Matrix(double)> gain) {
  ControlPolicy p;
  p.kind = Kind::kFeedbackGain;
  p.gain = std::move(gain);
  return p;
}

ControlPolicy ControlPolicy::FeedbackGain(const RiccatiSolution& solution,
                                          const Problem& data) {
  return FeedbackGain([&solution, &data](double t) {
    return eval_gamma<double>(solution.P_at(t), {}, data.At(t), 0.0);
  });
}

ControlPolicy ControlPolicy::FeedbackPlusPerturbation(
    std::function<Matrix(double)> gain,
    std::function<Vector(double)> perturbation) {
  ControlPolicy p;
  p.kind = Kind::kFeedbackPlusPerturbation;
  p.gain = std::move(gain);
  p.perturbation = std::move(perturbation);
  return p;
}

ControlPolicy ControlPolicy::OpenLoop(std::function<Vector(double)> perturbation) {
  ControlPolicy p;
  p.kind = Kind::kOpenLoop;
  p.perturbation = std::move(perturbation);
  return p;
}

namespace {

constexpr double kOverflowNorm = 1e12;

// Per-step affine maps, flattened row-major, for the closed loop
//   x+ = M x + m + sum_i (S_i x + s_i) dW_i
// with running cost x'W x + w'x + c and, optionally, the completing-square
// integrand x'H x + h'x + e.
struct Plan {
  int n = 0, d = 0, steps = 0;
  double dt = 0;
  bool with_square = false;
  std::vector<double> M, m, S, s, W, w, c, H, h, e;
  Matrix N;
};

void append(std::vector<double>& dst, const Matrix& src) {
  for (Eigen::Index i = 0; i < src.rows(); ++i) {
    for (Eigen::Index j = 0; j < src.cols(); ++j) dst.push_back(src(i, j));
  }
}

Plan make_plan(const Problem& data, const ControlPolicy& policy,
               const SimConfig& config, const RiccatiSolution* solution) {
  Plan plan;
  plan.n = data.n;
  plan.d = data.d;
  plan.steps = config.n_steps;
  plan.dt = data.horizon / config.n_steps;
  plan.with_square = solution != nullptr;
  plan.N = data.N;
  const double dt = plan.dt;
  for (int j = 0; j < config.n_steps; ++j) {
    const double t = dt * j;
    const Coefficients<double> c = data.At(t);
    const Matrix G = policy.gain ? policy.gain(t) : Matrix::Zero(data.k, data.n);
    const Vector v = policy.perturbation ? policy.perturbation(t) : Vector::Zero(data.k);
    if (G.rows() != data.k || G.cols() != data.n || v.size() != data.k) {
      throw InvalidProblem("policy gain or perturbation has the wrong shape");
    }
    append(plan.M, Matrix::Identity(data.n, data.n) + (c.A + c.B * G) * dt);
    append(plan.m, c.B * v * dt);
    for (int i = 0; i < data.d; ++i) {
      append(plan.S, c.C[std::size_t(i)] + c.D[std::size_t(i)] * G);
      append(plan.s, c.D[std::size_t(i)] * v);
    }
    append(plan.W, (c.Q + G.transpose() * c.R * G) * dt);
    append(plan.w, 2 * G.transpose() * c.R * v * dt);
    plan.c.push_back(v.dot(c.R * v) * dt);
    if (solution) {
      const auto terms = eval_terms<double>(solution->P_at(t), {}, c, 0.0, t);
      const Matrix Hd = G - terms.gamma;
      const Matrix& hat_R = terms.hat_R.matrix();
      append(plan.H, Hd.transpose() * hat_R * Hd * dt);
      append(plan.h, 2 * Hd.transpose() * hat_R * v * dt);
      plan.e.push_back(v.dot(hat_R * v) * dt);
    }
  }
  return plan;
}

struct Trajectory {
  std::vector<double> x, next, tmp;
  double cost = 0, square = 0;

  void reset(const Vector& xi) {
    x.assign(xi.data(), xi.data() + xi.size());
    next.assign(x.size(), 0.0);
    tmp.assign(x.size(), 0.0);
    cost = 0;
    square = 0;
  }
};

double quad(const double* A, const double* b, double c, const std::vector<double>& x,
            int n) {
  double acc = c;
  for (int r = 0; r < n; ++r) {
    double row = b[r];
    for (int q = 0; q < n; ++q) row += A[r * n + q] * x[std::size_t(q)];
    acc += x[std::size_t(r)] * row;
  }
  return acc;
}

void advance(const Plan& p, int j, const double* dW, Trajectory& tr) {
  const int n = p.n;
  const std::size_t nn = std::size_t(n) * std::size_t(n);
  const std::size_t js = std::size_t(j);
  tr.cost += quad(&p.W[js * nn], &p.w[js * std::size_t(n)], p.c[js], tr.x, n);
  if (p.with_square) {
    tr.square += quad(&p.H[js * nn], &p.h[js * std::size_t(n)], p.e[js], tr.x, n);
  }
  const double* M = &p.M[js * nn];
  const double* m = &p.m[js * std::size_t(n)];
  double norm2 = 0;
  for (int r = 0; r < n; ++r) {
    double acc = m[r];
    for (int q = 0; q < n; ++q) acc += M[r * n + q] * tr.x[std::size_t(q)];
    tr.next[std::size_t(r)] = acc;
  }
  for (int i = 0; i < p.d; ++i) {
    const double* S = &p.S[(js * std::size_t(p.d) + std::size_t(i)) * nn];
    const double* s = &p.s[(js * std::size_t(p.d) + std::size_t(i)) * std::size_t(n)];
    for (int r = 0; r < n; ++r) {
      double acc = s[r];
      for (int q = 0; q < n; ++q) acc += S[r * n + q] * tr.x[std::size_t(q)];
      tr.next[std::size_t(r)] += acc * dW[i];
    }
  }
  for (int r = 0; r < n; ++r) norm2 += tr.next[std::size_t(r)] * tr.next[std::size_t(r)];
  if (!(norm2 <= kOverflowNorm * kOverflowNorm)) {
    throw NumericalOverflow("state norm exceeded 1e12 (explosive closed loop)");
  }
  std::swap(tr.x, tr.next);
}

double terminal_cost(const Plan& p, const Trajectory& tr) {
  double acc = 0;
  for (int r = 0; r < p.n; ++r) {
    for (int q = 0; q < p.n; ++q) {
      acc += tr.x[std::size_t(r)] * p.N(r, q) * tr.x[std::size_t(q)];
    }
  }
  return acc;
}

std::mt19937_64 path_stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32),
                    std::uint32_t(index), std::uint32_t(index >> 32)};
  return std::mt19937_64(seq);
}

// Runs `body(first, last)` over [0, count) split in contiguous blocks.
template <typename Body>
void parallel_blocks(long count, int threads, const Body& body) {
  if (threads <= 0) threads = int(std::max(1u, std::thread::hardware_concurrency()));
  threads = int(std::min<long>(threads, count));
  if (threads <= 1) {
    body(0L, count);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  for (int w = 0; w < threads; ++w) {
    const long first = count * w / threads;
    const long last = count * (w + 1) / threads;
    pool.emplace_back([&, w, first, last] {
      try {
        body(first, last);
      } catch (...) {
        errors[std::size_t(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct Moments {
  double mean = 0;
  double stderr_ = 0;
};

// Fixed index order, so the result is independent of the thread split.
Moments moments(const std::vector<double>& v) {
  Moments out;
  const double n = double(v.size());
  double sum = 0;
  for (double x : v) sum += x;
  out.mean = sum / n;
  if (v.size() > 1) {
    double ss = 0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.stderr_ = std::sqrt(ss / (n - 1) / n);
  }
  return out;
}

SimulationReport run(const Plan& plan, const Vector& xi, const SimConfig& config) {
  std::vector<double> cost(static_cast<std::size_t>(config.n_paths));
  std::vector<double> square(static_cast<std::size_t>(config.n_paths));
  parallel_blocks(config.n_paths, config.threads, [&](long first, long last) {
    Trajectory plus, minus;
    std::vector<double> dW(std::size_t(plan.d)), dWm(std::size_t(plan.d));
    const double sq = std::sqrt(plan.dt);
    for (long p = first; p < last; ++p) {
      auto gen = path_stream(config.seed, std::uint64_t(p));
      std::normal_distribution<double> normal;
      plus.reset(xi);
      if (config.antithetic) minus.reset(xi);
      for (int j = 0; j < plan.steps; ++j) {
        for (int i = 0; i < plan.d; ++i) {
          dW[std::size_t(i)] = sq * normal(gen);
          dWm[std::size_t(i)] = -dW[std::size_t(i)];
        }
        advance(plan, j, dW.data(), plus);
        if (config.antithetic) advance(plan, j, dWm.data(), minus);
      }
      double c = plus.cost + terminal_cost(plan, plus);
      double s = plus.square;
      if (config.antithetic) {
        c = 0.5 * (c + minus.cost + terminal_cost(plan, minus));
        s = 0.5 * (s + minus.square);
      }
      cost[std::size_t(p)] = c;
      square[std::size_t(p)] = s;
    }
  });

  SimulationReport rep;
  const Moments mc = moments(cost);
  rep.cost_mean = mc.mean;
  rep.cost_stderr = mc.stderr_;
  rep.n_paths = config.n_paths;
  if (plan.with_square) {
    const Moments ms = moments(square);
    std::vector<double> diff(cost.size());
    for (std::size_t p = 0; p < cost.size(); ++p) diff[p] = cost[p] - square[p];
    const Moments md = moments(diff);
    rep.cs_rhs = ms.mean;
    rep.cs_residual_stderr = md.stderr_;
    // value is filled by the caller.
    rep.cs_lhs = mc.mean;
    rep.cs_residual = md.mean;
  }
  return rep;
}

}  // namespace

SimulationReport simulate_cost(const Problem& data, const ControlPolicy& policy,
                               const Vector& xi, const SimConfig& config) {
  data.Validate();
  config.Validate();
  if (xi.size() != data.n) throw InvalidProblem("initial state must have n entries");
  return run(make_plan(data, policy, config, nullptr), xi, config);
}

SimulationReport completing_square_report(const Problem& data,
                                          const RiccatiSolution& solution,
                                          const ControlPolicy& policy,
                                          const Vector& xi,
                                          const SimConfig& config) {
  data.Validate();
  config.Validate();
  if (!solution.completed()) {
    throw PreconditionFailed("completing-square report needs a completed solution");
  }
  if (xi.size() != data.n) throw InvalidProblem("initial state must have n entries");
  SimulationReport rep = run(make_plan(data, policy, config, &solution), xi, config);
  rep.value = xi.dot(solution.P0() * xi);
  rep.cs_lhs -= rep.value;
  rep.cs_residual = std::abs(rep.cs_residual - rep.value);
  return rep;
}

double fundamental_pair_check(const Problem& data,
                              const std::function<Matrix(double)>& gain,
                              const SimConfig& config) {
  data.Validate();
  config.Validate();
  const int n = data.n, d = data.d;
  const double dt = data.horizon / config.n_steps;
  const double sq = std::sqrt(dt);

  // Closed-loop drift 𝒜 = A + BΓ and diffusions 𝒞_i = C_i + D_iΓ.
  std::vector<Matrix> drift, inverse_drift;
  std::vector<std::vector<Matrix>> diff(std::size_t(config.n_steps));
  for (int j = 0; j < config.n_steps; ++j) {
    const double t = dt * j;
    const Coefficients<double> c = data.At(t);
    const Matrix G = gain ? gain(t) : Matrix::Zero(data.k, n);
    if (!G.allFinite()) throw InvalidProblem("gain is not finite");
    const Matrix a = c.A + c.B * G;
    Matrix cc = Matrix::Zero(n, n);
    for (int i = 0; i < d; ++i) {
      diff[std::size_t(j)].push_back(c.C[std::size_t(i)] + c.D[std::size_t(i)] * G);
      cc += diff[std::size_t(j)].back() * diff[std::size_t(j)].back();
    }
    drift.push_back(a);
    inverse_drift.push_back(a - cc);
  }

  std::vector<double> worst(std::size_t(config.n_paths), 0.0);
  parallel_blocks(config.n_paths, config.threads, [&](long first, long last) {
    const Matrix I = Matrix::Identity(n, n);
    Matrix X(n, n), Xt(n, n), Xn(n, n), Xtn(n, n);
    std::vector<double> dW(static_cast<std::size_t>(d));
    for (long p = first; p < last; ++p) {
      auto gen = path_stream(config.seed, std::uint64_t(p));
      std::normal_distribution<double> normal;
      const int signs = config.antithetic ? 2 : 1;
      std::vector<std::vector<double>> noise(std::size_t(config.n_steps),
                                             std::vector<double>(std::size_t(d)));
      for (auto& step : noise) {
        for (auto& z : step) z = sq * normal(gen);
      }
      double w = 0;
      for (int sign = 0; sign < signs; ++sign) {
        const double sgn = sign == 0 ? 1.0 : -1.0;
        X = I;
        Xt = I;
        for (int j = 0; j < config.n_steps; ++j) {
          const std::size_t js = std::size_t(j);
          Xn.noalias() = X + drift[js] * X * dt;
          Xtn.noalias() = Xt - Xt * inverse_drift[js] * dt;
          for (int i = 0; i < d; ++i) {
            const double dw = sgn * noise[js][std::size_t(i)];
            Xn.noalias() += diff[js][std::size_t(i)] * X * dw;
            Xtn.noalias() -= Xt * diff[js][std::size_t(i)] * dw;
          }
          X.swap(Xn);
          Xt.swap(Xtn);
          if (!(X.norm() <= kOverflowNorm) || !(Xt.norm() <= kOverflowNorm)) {
            throw NumericalOverflow("fundamental matrix norm exceeded 1e12");
          }
          w = std::max(w, (Xt * X - I).norm());
        }
      }
      worst[std::size_t(p)] = w;
    }
  });
  return *std::max_element(worst.begin(), worst.end());
}

double hamiltonian_identity_check(const Problem& data,
                                  const RiccatiSolution& solution,
                                  int probe_points) {
  const int m = int(solution.times.size());
  if (m == 0) throw PreconditionFailed("empty solution");
  probe_points = std::clamp(probe_points, 1, m);
  double worst = 0;
  for (int p = 0; p < probe_points; ++p) {
    const int i = probe_points == 1
                      ? 0
                      : int(std::lround(double(p) * double(m - 1) /
                                        double(probe_points - 1)));
    const std::size_t is = std::size_t(i);
    const Coefficients<double> c = data.At(solution.times[is]);
    const Matrix& P = solution.P[is];
    const Matrix& G = solution.gain[is];
    Matrix defect = c.R * G + c.B.transpose() * P;
    for (int k = 0; k < c.d(); ++k) {
      const Matrix& Di = c.D[std::size_t(k)];
      defect.noalias() += Di.transpose() * (P * c.C[std::size_t(k)] + P * Di * G);
    }
    worst = std::max(worst, defect.norm());
  }
  return worst;
}

}  // namespace lqsre

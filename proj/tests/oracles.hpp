#pragma once

// Independent reference values for the tests. Nothing here calls into the
// library's numerics.

#include <lqsre/lq_core.hpp>

#include <cmath>
#include <functional>
#include <random>

namespace oracles {

using lqsre::Matrix;
using lqsre::Problem;

/// Plain bisection for an increasing function on [lo, hi].
inline double bisect(const std::function<double(double)>& g, double lo, double hi) {
  for (int i = 0; i < 200 && hi - lo > 1e-16 * std::max(1.0, std::abs(hi)); ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Scalar benchmark A = C = Q = 0, B = D = 1, N = 1, constant R = r on
/// [0, T]: dP/dt = P^2/(r + P) separates to ln P - r/P = t - T - r.
inline double benchmark_P(double r, double t, double T = 1) {
  const double target = t - T - r;
  const double lo = std::max(0.0, -r) + 1e-15;
  return bisect([&](double p) { return std::log(p) - r / p - target; }, lo, 1.0);
}

/// Root of a - ln a = c on (0, 1].
inline double alpha_root(double c) {
  return bisect([&](double a) { return -(a - std::log(a) - c); }, 1e-300, 1.0);
}

/// Branch of dP/dt = P^2 on [1, 2] with P(2) = 1.
inline double blowup_branch(double t) { return 1.0 / (3.0 - t); }

inline Problem benchmark_problem(double r, double T = 1) {
  const Matrix z = Matrix::Zero(1, 1), o = Matrix::Ones(1, 1);
  return Problem::Constant(T, z, o, {z}, {o}, r * o, z, o);
}

/// Hand-written scalar maps for n = k = d = 1.
struct ScalarMaps {
  double a, b, c, d, r, q;

  double hat_R(double p) const { return r + d * d * p; }
  double gamma(double p, double lam = 0) const {
    return -(b * p + d * (p * c + lam)) / hat_R(p);
  }
  double f(double p, double lam = 0) const {
    const double s = b * p + d * (p * c + lam);
    return 2 * a * p + c * c * p + 2 * c * lam + q - s * s / hat_R(p);
  }
};

inline Matrix random_matrix(std::mt19937_64& rng, int rows, int cols, double scale = 1) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = u(rng);
  }
  return m;
}

inline Matrix random_psd(std::mt19937_64& rng, int n, double floor, double scale = 1) {
  const Matrix g = random_matrix(rng, n, n, scale);
  return g * g.transpose() + floor * Matrix::Identity(n, n);
}

/// Definite problem (R >> 0, Q, N >= 0) with piecewise-linear coefficients
/// on a few grid points.
inline Problem random_definite(std::mt19937_64& rng, int n, int k, int d, int intervals = 3,
                               double horizon = 1) {
  using Path = lqsre::Path;
  auto path = [&](int rows, int cols, double scale) {
    std::vector<Matrix> s;
    for (int j = 0; j <= intervals; ++j) s.push_back(random_matrix(rng, rows, cols, scale));
    return Path(horizon, s, lqsre::Interpolation::kPiecewiseLinear);
  };
  auto psd_path = [&](int dim, double floor) {
    std::vector<Matrix> s;
    for (int j = 0; j <= intervals; ++j) s.push_back(random_psd(rng, dim, floor, 0.7));
    return Path(horizon, s, lqsre::Interpolation::kPiecewiseLinear);
  };
  Problem p;
  p.n = n;
  p.k = k;
  p.d = d;
  p.horizon = horizon;
  p.A = path(n, n, 0.8);
  p.B = path(n, k, 0.8);
  for (int i = 0; i < d; ++i) {
    p.C.push_back(path(n, n, 0.4));
    p.D.push_back(path(n, k, 0.4));
  }
  p.R = psd_path(k, 0.5);
  p.Q = psd_path(n, 0.0);
  p.N = random_psd(rng, n, 0.0, 0.7);
  return p;
}

/// Backward recursion for the scalar Euler-discretized benchmark, written
/// out with doubles.
inline double scalar_dp(double r, int steps, double T = 1) {
  const double dt = T / steps;
  double p = 1;
  for (int j = 0; j < steps; ++j) {
    // B_Δ = dt, D_Δ = sqrt(dt), A_Δ = 1, C = 0.
    const double s = r * dt + p * dt * dt + p * dt;
    const double g = dt * p;
    p = p - g * g / s;
  }
  return p;
}

}  // namespace oracles

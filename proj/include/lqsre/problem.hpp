#pragma once

#include <lqsre/coefficient_path.hpp>
#include <lqsre/types.hpp>

#include <algorithm>
#include <string>
#include <vector>

namespace lqsre {

/// Coefficients frozen at one time instant.
template <typename Scalar>
struct Coefficients {
  using Matrix = MatrixX<Scalar>;
  Matrix A, B;
  std::vector<Matrix> C, D;
  Matrix R, Q;

  int n() const { return int(A.rows()); }
  int k() const { return int(B.cols()); }
  int d() const { return int(C.size()); }
};

/// Coefficient tuple (A, B, C_i, D_i; R, Q, N) of the controlled system
///   dx = (Ax + Bu) dt + sum_i (C_i x + D_i u) dw_i
/// with cost E{ x(T)'N x(T) + int_0^T u'Ru + x'Qx dt }.
/// R, Q and N may be indefinite.
template <typename Scalar>
struct ProblemData {
  using Matrix = MatrixX<Scalar>;
  using Path = CoefficientPath<Scalar>;

  int n = 0;
  int k = 0;
  int d = 0;
  Scalar horizon = 1;
  Path A, B;
  std::vector<Path> C, D;
  Path R, Q;
  Matrix N;

  int intervals() const { return A.intervals(); }
  Interpolation interpolation() const { return A.interpolation(); }
  Scalar time(int j) const { return A.time(j); }
  int segment(Scalar t) const { return A.segment(t); }

  Coefficients<Scalar> At(Scalar t) const { return At(t, segment(t)); }

  Coefficients<Scalar> At(Scalar t, int seg) const {
    Coefficients<Scalar> c;
    c.A = A.at(t, seg);
    c.B = B.at(t, seg);
    c.C.reserve(std::size_t(d));
    c.D.reserve(std::size_t(d));
    for (int i = 0; i < d; ++i) {
      c.C.push_back(C[std::size_t(i)].at(t, seg));
      c.D.push_back(D[std::size_t(i)].at(t, seg));
    }
    // Interpolating symmetric samples keeps symmetry up to rounding.
    c.R = Scalar(0.5) * (R.at(t, seg) + R.at(t, seg).transpose());
    c.Q = Scalar(0.5) * (Q.at(t, seg) + Q.at(t, seg).transpose());
    return c;
  }

  /// Throws InvalidProblem when any invariant fails.
  void Validate() const {
    auto fail = [](const std::string& what) { throw InvalidProblem(what); };
    if (n < 1 || k < 1 || d < 1) fail("dimensions n, k, d must be positive");
    if (!(horizon > Scalar(0))) fail("horizon must be positive");
    if (int(C.size()) != d || int(D.size()) != d) {
      fail("C and D must each hold d paths");
    }
    const int m = intervals();
    if (m < 1) fail("grid needs at least two points");
    auto check = [&](const Path& p, Eigen::Index r, Eigen::Index c,
                     const std::string& name) {
      if (p.intervals() != m) fail(name + ": grid differs from A");
      if (p.interpolation() != interpolation()) {
        fail(name + ": interpolation differs from A");
      }
      if (p.horizon() != horizon) fail(name + ": horizon differs");
      if (p.rows() != r || p.cols() != c) {
        fail(name + ": expected " + std::to_string(r) + "x" +
             std::to_string(c) + ", got " + std::to_string(p.rows()) + "x" +
             std::to_string(p.cols()));
      }
    };
    check(A, n, n, "A");
    check(B, n, k, "B");
    for (int i = 0; i < d; ++i) {
      check(C[std::size_t(i)], n, n, "C[" + std::to_string(i) + "]");
      check(D[std::size_t(i)], n, k, "D[" + std::to_string(i) + "]");
    }
    check(R, k, k, "R");
    check(Q, n, n, "Q");
    auto symmetric = [](const Matrix& M) {
      return (M - M.transpose()).cwiseAbs().maxCoeff() <=
             Scalar(1e-12) * std::max(Scalar(1), M.cwiseAbs().maxCoeff());
    };
    for (const auto& s : R.samples()) {
      if (!symmetric(s)) fail("R: sample is not symmetric");
    }
    for (const auto& s : Q.samples()) {
      if (!symmetric(s)) fail("Q: sample is not symmetric");
    }
    if (N.rows() != n || N.cols() != n) fail("N: expected n x n");
    if (!N.allFinite()) fail("N: non-finite entries");
    if (!symmetric(N)) fail("N: not symmetric");
  }

  /// Time-invariant data on a grid with `intervals` segments.
  static ProblemData Constant(Scalar horizon, const Matrix& a, const Matrix& b,
                              const std::vector<Matrix>& c,
                              const std::vector<Matrix>& dd, const Matrix& r,
                              const Matrix& q, const Matrix& terminal,
                              int intervals = 1,
                              Interpolation interpolation =
                                  Interpolation::kPiecewiseLinear) {
    ProblemData p;
    p.n = int(a.rows());
    p.k = int(b.cols());
    p.d = int(c.size());
    p.horizon = horizon;
    p.A = Path::Constant(horizon, intervals, a, interpolation);
    p.B = Path::Constant(horizon, intervals, b, interpolation);
    for (const auto& ci : c) {
      p.C.push_back(Path::Constant(horizon, intervals, ci, interpolation));
    }
    for (const auto& di : dd) {
      p.D.push_back(Path::Constant(horizon, intervals, di, interpolation));
    }
    p.R = Path::Constant(horizon, intervals, r, interpolation);
    p.Q = Path::Constant(horizon, intervals, q, interpolation);
    p.N = terminal;
    p.Validate();
    return p;
  }
};

}  // namespace lqsre

#include <lqsre/dp_oracle.hpp>

#include <Eigen/Cholesky>

namespace lqsre {

OracleResult dp_solve(const Problem& data, int steps, double eps_pos) {
  data.Validate();
  if (steps < 1) throw InvalidProblem("oracle needs at least one step");
  const int n = data.n;
  const double dt = data.horizon / steps;
  const double sq = std::sqrt(dt);

  OracleResult out;
  out.delta = dt;
  out.trajectory.assign(std::size_t(steps) + 1, Matrix());
  Matrix P = data.N;
  out.trajectory[std::size_t(steps)] = P;

  for (int j = steps - 1; j >= 0; --j) {
    const Coefficients<double> c = data.At(dt * j);
    const Matrix Ad = Matrix::Identity(n, n) + c.A * dt;
    const Matrix Bd = c.B * dt;
    Matrix S = c.R * dt + Bd.transpose() * P * Bd;
    Matrix G = Bd.transpose() * P * Ad;
    Matrix next = c.Q * dt + Ad.transpose() * P * Ad;
    for (int i = 0; i < c.d(); ++i) {
      const Matrix Cd = c.C[std::size_t(i)] * sq;
      const Matrix Dd = c.D[std::size_t(i)] * sq;
      S.noalias() += Dd.transpose() * P * Dd;
      G.noalias() += Dd.transpose() * P * Cd;
      next.noalias() += Cd.transpose() * P * Cd;
    }
    S = SymmetricMatrix<double>::Project(S).matrix();
    if (!(min_eigenvalue(S) > eps_pos * dt)) {
      out.constraint_ok = false;
      out.failed_step = j;
      out.trajectory.erase(out.trajectory.begin(), out.trajectory.begin() + j + 1);
      out.P0 = P;
      return out;
    }
    next.noalias() -= G.transpose() * S.llt().solve(G);
    P = SymmetricMatrix<double>::Project(next).matrix();
    out.trajectory[std::size_t(j)] = P;
  }
  out.P0 = P;
  return out;
}

}  // namespace lqsre

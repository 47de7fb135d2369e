#pragma once

// Pointwise maps of the Riccati equation:
//   R̂(P)    = R + sum_i D_i' P D_i
//   Γ(P, Λ) = -R̂(P)^{-1} [B'P + sum_i D_i'(P C_i + Λ_i)]
//   f(P, Λ) = A'P + PA + sum_i (C_i'P C_i + C_i'Λ_i + Λ_i C_i) + Q - Γ'R̂Γ
// Λ is passed as a span of d matrices; an empty span means Λ = 0.

#include <lqsre/problem.hpp>
#include <lqsre/types.hpp>

#include <Eigen/Eigenvalues>

#include <span>
#include <type_traits>

namespace lqsre {

inline constexpr double kDefaultEpsPos = 1e-8;

template <typename T>
using NonDeduced = std::type_identity_t<T>;
/// Λ_1..Λ_d; empty means Λ = 0.
template <typename Scalar>
using LambdaSpan = std::type_identity_t<std::span<const MatrixX<Scalar>>>;

/// Smallest eigenvalue of a symmetric matrix.
template <typename Derived>
typename Derived::Scalar min_eigenvalue(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  if (m.rows() == 1) return m(0, 0);
  if (m.rows() == 2) {
    // Closed form keeps the 2x2 case cheap inside simulation loops.
    const Scalar a = m(0, 0), b = Scalar(0.5) * (m(0, 1) + m(1, 0)), c = m(1, 1);
    using std::hypot;
    return Scalar(0.5) * (a + c) - hypot(Scalar(0.5) * (a - c), b);
  }
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(m.eval(),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

template <typename Scalar>
Scalar min_eigenvalue(const SymmetricMatrix<Scalar>& m) {
  return min_eigenvalue(m.matrix());
}

template <typename Scalar>
SymmetricMatrix<Scalar> eval_hat_R(const MatrixX<Scalar>& P,
                                   const Coefficients<Scalar>& c) {
  MatrixX<Scalar> r = c.R;
  for (int i = 0; i < c.d(); ++i) {
    r.noalias() += c.D[std::size_t(i)].transpose() * P * c.D[std::size_t(i)];
  }
  return SymmetricMatrix<Scalar>::Project(r);
}

template <typename Scalar>
SymmetricMatrix<Scalar> eval_hat_R(const SymmetricMatrix<Scalar>& P,
                                   const ProblemData<Scalar>& data, NonDeduced<Scalar> t) {
  return eval_hat_R(P.matrix(), data.At(t));
}

/// B'P + sum_i D_i'(P C_i + Λ_i): the k x n coupling term.
template <typename Scalar>
MatrixX<Scalar> coupling(const MatrixX<Scalar>& P,
                         LambdaSpan<Scalar> lambda,
                         const Coefficients<Scalar>& c) {
  MatrixX<Scalar> s = c.B.transpose() * P;
  for (int i = 0; i < c.d(); ++i) {
    const auto& Di = c.D[std::size_t(i)];
    s.noalias() += Di.transpose() * P * c.C[std::size_t(i)];
    if (!lambda.empty()) s.noalias() += Di.transpose() * lambda[std::size_t(i)];
  }
  return s;
}

/// All three maps at once, sharing the factorization of R̂.
template <typename Scalar>
struct RiccatiTerms {
  SymmetricMatrix<Scalar> hat_R;
  Scalar margin;  // λ_min(R̂)
  MatrixX<Scalar> gamma;
  SymmetricMatrix<Scalar> f;
};

/// Throws ConstraintViolation(t, margin) when λ_min(R̂(P)) <= eps_pos.
template <typename Scalar>
RiccatiTerms<Scalar> eval_terms(const MatrixX<Scalar>& P,
                                LambdaSpan<Scalar> lambda,
                                const Coefficients<Scalar>& c,
                                NonDeduced<Scalar> eps_pos = Scalar(kDefaultEpsPos),
                                NonDeduced<Scalar> t = Scalar(0)) {
  RiccatiTerms<Scalar> out;
  out.hat_R = eval_hat_R(P, c);
  out.margin = min_eigenvalue(out.hat_R.matrix());
  if (!(out.margin > eps_pos)) {
    throw ConstraintViolation(double(t), double(out.margin));
  }
  const MatrixX<Scalar> s = coupling(P, lambda, c);
  Eigen::LLT<MatrixX<Scalar>> llt(out.hat_R.matrix());
  out.gamma = -llt.solve(s);

  MatrixX<Scalar> f = c.A.transpose() * P + P * c.A + c.Q;
  for (int i = 0; i < c.d(); ++i) {
    const auto& Ci = c.C[std::size_t(i)];
    f.noalias() += Ci.transpose() * P * Ci;
    if (!lambda.empty()) {
      f.noalias() += Ci.transpose() * lambda[std::size_t(i)];
      f.noalias() += lambda[std::size_t(i)] * Ci;
    }
  }
  // Γ'R̂Γ = -Γ's since R̂Γ = -s.
  f.noalias() += out.gamma.transpose() * s;
  out.f = SymmetricMatrix<Scalar>::Project(f);
  return out;
}

template <typename Scalar>
MatrixX<Scalar> eval_gamma(const MatrixX<Scalar>& P,
                           LambdaSpan<Scalar> lambda,
                           const Coefficients<Scalar>& c,
                           NonDeduced<Scalar> eps_pos = Scalar(kDefaultEpsPos)) {
  const auto hat_R = eval_hat_R(P, c);
  const Scalar margin = min_eigenvalue(hat_R.matrix());
  if (!(margin > eps_pos)) throw ConstraintViolation(0.0, double(margin));
  return -hat_R.matrix().llt().solve(coupling(P, lambda, c));
}

template <typename Scalar>
MatrixX<Scalar> eval_gamma(const SymmetricMatrix<Scalar>& P,
                           LambdaSpan<Scalar> lambda,
                           const ProblemData<Scalar>& data, NonDeduced<Scalar> t,
                           NonDeduced<Scalar> eps_pos = Scalar(kDefaultEpsPos)) {
  try {
    return eval_gamma(P.matrix(), lambda, data.At(t), eps_pos);
  } catch (const ConstraintViolation& e) {
    throw ConstraintViolation(double(t), e.margin());
  }
}

template <typename Scalar>
SymmetricMatrix<Scalar> eval_f(const MatrixX<Scalar>& P,
                               LambdaSpan<Scalar> lambda,
                               const Coefficients<Scalar>& c,
                               NonDeduced<Scalar> eps_pos = Scalar(kDefaultEpsPos)) {
  return eval_terms(P, lambda, c, eps_pos).f;
}

template <typename Scalar>
SymmetricMatrix<Scalar> eval_f(const SymmetricMatrix<Scalar>& P,
                               LambdaSpan<Scalar> lambda,
                               const ProblemData<Scalar>& data, NonDeduced<Scalar> t,
                               NonDeduced<Scalar> eps_pos = Scalar(kDefaultEpsPos)) {
  return eval_terms(P.matrix(), lambda, data.At(t), eps_pos, t).f;
}

}  // namespace lqsre

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace lqsre {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

enum class Interpolation { kPiecewiseConstantLeft, kPiecewiseLinear };

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent problem data.
class InvalidProblem : public Error {
 public:
  using Error::Error;
};

/// λ_min(R̂(P)) fell to or below the positivity floor.
class ConstraintViolation : public Error {
 public:
  ConstraintViolation(double time, double margin)
      : Error("constraint R + sum D'PD > eps_pos violated at t = " +
              std::to_string(time) + " (margin " + std::to_string(margin) +
              ")"),
        time_(time),
        margin_(margin) {}
  double time() const { return time_; }
  double margin() const { return margin_; }

 private:
  double time_;
  double margin_;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

class PreconditionFailed : public Error {
 public:
  using Error::Error;
};

class NumericalOverflow : public Error {
 public:
  using Error::Error;
};

/// Dense symmetric matrix. Construction from a general matrix checks the
/// asymmetry (relative 1e-9) and stores the projection (M + M')/2.
template <typename Scalar>
class SymmetricMatrix {
 public:
  using Matrix = MatrixX<Scalar>;

  SymmetricMatrix() = default;

  template <typename Derived>
  explicit SymmetricMatrix(const Eigen::MatrixBase<Derived>& m) {
    if (m.rows() != m.cols()) {
      throw InvalidProblem("symmetric matrix must be square");
    }
    const Scalar asym = (m - m.transpose()).norm();
    if (asym > Scalar(1e-9) * m.norm()) {
      throw InvalidProblem("matrix is not symmetric (relative asymmetry " +
                           std::to_string(double(asym / m.norm())) + ")");
    }
    m_ = Scalar(0.5) * (m + m.transpose());
  }

  /// Projection without the asymmetry check.
  template <typename Derived>
  static SymmetricMatrix Project(const Eigen::MatrixBase<Derived>& m) {
    SymmetricMatrix s;
    s.m_ = Scalar(0.5) * (m + m.transpose());
    return s;
  }

  static SymmetricMatrix Zero(Eigen::Index dim) {
    return Project(Matrix::Zero(dim, dim));
  }
  static SymmetricMatrix Identity(Eigen::Index dim) {
    return Project(Matrix::Identity(dim, dim));
  }

  const Matrix& matrix() const { return m_; }
  operator const Matrix&() const { return m_; }  // NOLINT
  Eigen::Index dim() const { return m_.rows(); }
  Scalar operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

 private:
  Matrix m_;
};

}  // namespace lqsre

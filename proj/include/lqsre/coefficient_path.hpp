#pragma once

#include <lqsre/types.hpp>

#include <algorithm>
#include <utility>
#include <vector>

namespace lqsre {

/// Matrix-valued function of time sampled on the uniform grid
/// t_j = T j / m, j = 0..m.
template <typename Scalar>
class CoefficientPath {
 public:
  using Matrix = MatrixX<Scalar>;

  CoefficientPath() = default;

  CoefficientPath(Scalar horizon, std::vector<Matrix> samples,
                  Interpolation interpolation)
      : horizon_(horizon),
        samples_(std::move(samples)),
        interpolation_(interpolation) {
    if (!(horizon_ > Scalar(0))) {
      throw InvalidProblem("coefficient path horizon must be positive");
    }
    if (samples_.size() < 2) {
      throw InvalidProblem("coefficient path needs at least two grid points");
    }
    for (const auto& s : samples_) {
      if (s.rows() != samples_.front().rows() ||
          s.cols() != samples_.front().cols()) {
        throw InvalidProblem("coefficient path samples differ in shape");
      }
      if (!s.allFinite()) {
        throw InvalidProblem("coefficient path has non-finite entries");
      }
    }
  }

  static CoefficientPath Constant(Scalar horizon, int intervals,
                                  const Matrix& value,
                                  Interpolation interpolation =
                                      Interpolation::kPiecewiseLinear) {
    return CoefficientPath(
        horizon, std::vector<Matrix>(std::size_t(intervals) + 1, value),
        interpolation);
  }

  int intervals() const { return int(samples_.size()) - 1; }
  Scalar horizon() const { return horizon_; }
  Interpolation interpolation() const { return interpolation_; }
  Eigen::Index rows() const { return samples_.front().rows(); }
  Eigen::Index cols() const { return samples_.front().cols(); }
  const std::vector<Matrix>& samples() const { return samples_; }

  Scalar time(int j) const {
    return j == intervals() ? horizon_ : horizon_ * Scalar(j) / Scalar(intervals());
  }

  /// Index j with t in [t_j, t_{j+1}); the last segment also owns t = T.
  int segment(Scalar t) const {
    const int m = intervals();
    using std::floor;
    int j = int(floor(t / horizon_ * Scalar(m)));
    j = std::clamp(j, 0, m - 1);
    if (j + 1 < m && time(j + 1) <= t) ++j;
    if (j > 0 && t < time(j)) --j;
    return j;
  }

  Matrix operator()(Scalar t) const { return at(t, segment(t)); }

  /// Evaluates with the interpolant of a fixed segment, so one-sided limits
  /// at grid points are available to callers that step across kinks.
  Matrix at(Scalar t, int seg) const {
    if (interpolation_ == Interpolation::kPiecewiseConstantLeft) {
      return samples_[std::size_t(seg)];
    }
    const Scalar t0 = time(seg);
    const Scalar t1 = time(seg + 1);
    const Scalar w = std::clamp((t - t0) / (t1 - t0), Scalar(0), Scalar(1));
    return (Scalar(1) - w) * samples_[std::size_t(seg)] +
           w * samples_[std::size_t(seg) + 1];
  }

 private:
  Scalar horizon_{1};
  std::vector<Matrix> samples_;
  Interpolation interpolation_{Interpolation::kPiecewiseLinear};
};

}  // namespace lqsre

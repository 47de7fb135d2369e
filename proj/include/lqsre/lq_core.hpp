#pragma once

#include <lqsre/coefficient_path.hpp>
#include <lqsre/evaluators.hpp>
#include <lqsre/problem.hpp>
#include <lqsre/types.hpp>

namespace lqsre {

// Double-precision names used by the solver, certificate and simulation
// layers.
using Matrix = MatrixX<double>;
using Vector = VectorX<double>;
using Symmetric = SymmetricMatrix<double>;
using Path = CoefficientPath<double>;
using Problem = ProblemData<double>;

}  // namespace lqsre

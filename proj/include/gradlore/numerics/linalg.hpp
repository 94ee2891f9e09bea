#pragma once

#include "gradlore/numerics/matrix.hpp"

#include <span>
#include <vector>

namespace gradlore {

/// Lower-triangular Cholesky factor L with A = L L^T. Throws NotSpd when a
/// pivot is <= kMinPivot or A is not symmetric to within 1e-10.
Matrix cholesky(const Matrix& a);

inline constexpr double kMinPivot = 1e-12;

/// Solves A x = b for symmetric positive-definite A.
std::vector<double> solve_spd(const Matrix& a, std::span<const double> b);

}  // namespace gradlore

#pragma once

#include "gradlore/numerics/matrix.hpp"

#include <functional>
#include <span>
#include <vector>

namespace gradlore {

using VectorFunction = std::function<std::vector<double>(std::span<const double>)>;

/// Central-difference Jacobian, entry (i, j) = d f_i / d x_j. Throws
/// BadParams for h <= 0 and NonFinite if any evaluation is not finite.
Matrix fd_jacobian(const VectorFunction& f, std::span<const double> x, double h = 1e-5);

/// Central-difference gradient of a scalar function.
std::vector<double> fd_gradient(const std::function<double(std::span<const double>)>& f,
                                std::span<const double> x, double h = 1e-5);

/// |a - b| / max(1, |a|, |b|): relative error with an absolute floor near zero.
double relative_error(double a, double b);
/// max_i |a_i - b_i| / max(max_i |a_i|, max_i |b_i|); zero when both are zero.
double norm_relative_error(std::span<const double> a, std::span<const double> b);

}  // namespace gradlore

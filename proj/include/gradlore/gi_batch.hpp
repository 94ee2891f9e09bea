#pragma once

#include "gradlore/numerics/matrix.hpp"

#include <cstddef>
#include <span>

namespace gradlore {

/// Training triples {x_i, z_i, dz_i/dx_i}. Row i of `target_grads` holds
/// the d_out x d_in Jacobian of sample i flattened row-major.
struct GiBatch {
  Matrix inputs;        ///< n x d_in
  Matrix targets;       ///< n x d_out
  Matrix target_grads;  ///< n x (d_out * d_in)

  std::size_t size() const noexcept { return inputs.rows(); }
  std::size_t input_dim() const noexcept { return inputs.cols(); }
  std::size_t output_dim() const noexcept { return targets.cols(); }

  std::span<const double> x(std::size_t i) const { return inputs.row(i); }
  std::span<const double> z(std::size_t i) const { return targets.row(i); }
  std::span<const double> grad(std::size_t i) const { return target_grads.row(i); }

  /// Throws ShapeMismatch if the three parts disagree on n or dimensions,
  /// NonFinite if any gradient entry is not finite.
  void validate() const;

  /// Rows `indices` in order.
  GiBatch select(std::span<const std::size_t> indices) const;
};

}  // namespace gradlore

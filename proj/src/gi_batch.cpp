#include "gradlore/gi_batch.hpp"

#include "gradlore/error.hpp"

#include <algorithm>

namespace gradlore {

void GiBatch::validate() const {
  const std::size_t n = inputs.rows();
  if (targets.rows() != n || target_grads.rows() != n)
    throw Error(ErrorCode::ShapeMismatch, "GiBatch: inputs, targets and gradients differ in length");
  if (target_grads.cols() != targets.cols() * inputs.cols())
    throw Error(ErrorCode::ShapeMismatch, "GiBatch: gradient width must be d_out * d_in");
  if (!target_grads.all_finite()) throw Error(ErrorCode::NonFinite, "GiBatch: non-finite target gradient");
}

GiBatch GiBatch::select(std::span<const std::size_t> indices) const {
  GiBatch out{Matrix(indices.size(), inputs.cols()), Matrix(indices.size(), targets.cols()),
              Matrix(indices.size(), target_grads.cols())};
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const std::size_t i = indices[r];
    if (i >= size()) throw Error(ErrorCode::ShapeMismatch, "GiBatch::select: index out of range");
    std::ranges::copy(inputs.row(i), out.inputs.row(r).begin());
    std::ranges::copy(targets.row(i), out.targets.row(r).begin());
    std::ranges::copy(target_grads.row(i), out.target_grads.row(r).begin());
  }
  return out;
}

}  // namespace gradlore

#include "gradlore/numerics/linalg.hpp"

#include "gradlore/error.hpp"
#include "gradlore/simd/kernels.hpp"

#include <cmath>
#include <string>

namespace gradlore {

Matrix cholesky(const Matrix& a) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw Error(ErrorCode::ShapeMismatch, "cholesky: matrix not square");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(a(i, j) - a(j, i)) > 1e-10)
        throw Error(ErrorCode::NotSpd, "cholesky: matrix not symmetric");

  const auto& k = simd::active();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const double pivot = a(j, j) - k.dot(l.row(j).data(), l.row(j).data(), j);
    if (!(pivot > kMinPivot)) {
      throw Error(ErrorCode::NotSpd, "cholesky: non-positive pivot at column " + std::to_string(j));
    }
    const double d = std::sqrt(pivot);
    l(j, j) = d;
    for (std::size_t i = j + 1; i < n; ++i) {
      l(i, j) = (a(i, j) - k.dot(l.row(i).data(), l.row(j).data(), j)) / d;
    }
  }
  return l;
}

std::vector<double> solve_spd(const Matrix& a, std::span<const double> b) {
  if (b.size() != a.rows()) throw Error(ErrorCode::ShapeMismatch, "solve_spd: rhs size mismatch");
  const Matrix l = cholesky(a);
  const std::size_t n = b.size();
  const auto& k = simd::active();

  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = (b[i] - k.dot(l.row(i).data(), y.data(), i)) / l(i, i);
  }
  std::vector<double> x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= l(j, ii) * x[j];
    x[ii] = s / l(ii, ii);
  }
  return x;
}

}  // namespace gradlore

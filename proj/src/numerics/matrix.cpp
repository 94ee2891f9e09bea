#include "gradlore/numerics/matrix.hpp"

#include "gradlore/error.hpp"
#include "gradlore/simd/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace gradlore {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw Error(ErrorCode::ShapeMismatch, "Matrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw Error(ErrorCode::ShapeMismatch, "matmul: inner dimensions differ");
  Matrix out(a.rows(), b.cols());
  const auto& k = simd::active();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t i = 0; i < a.cols(); ++i) {
      k.axpy(a(r, i), b.row(i).data(), out.row(r).data(), b.cols());
    }
  }
  return out;
}

Matrix gram(const Matrix& a) {
  Matrix out(a.cols(), a.cols());
  const auto& k = simd::active();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    k.ger_acc(out.data().data(), a.cols(), a.cols(), a.row(r).data(), a.row(r).data());
  }
  return out;
}

std::vector<double> matvec(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw Error(ErrorCode::ShapeMismatch, "matvec: size mismatch");
  std::vector<double> y(a.rows());
  simd::active().gemv(a.data().data(), a.rows(), a.cols(), x.data(), nullptr, y.data());
  return y;
}

std::vector<double> matvec_t(const Matrix& a, std::span<const double> x) {
  if (a.rows() != x.size()) throw Error(ErrorCode::ShapeMismatch, "matvec_t: size mismatch");
  std::vector<double> y(a.cols(), 0.0);
  simd::active().gemv_t_acc(a.data().data(), a.rows(), a.cols(), x.data(), y.data());
  return y;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace gradlore

#include "gradlore/numerics/fd.hpp"

#include "gradlore/error.hpp"

#include <algorithm>
#include <cmath>

namespace gradlore {
namespace {

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw Error(ErrorCode::NonFinite, what);
}

}  // namespace

Matrix fd_jacobian(const VectorFunction& f, std::span<const double> x, double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::BadParams, "fd_jacobian: step must be > 0");
  std::vector<double> probe(x.begin(), x.end());
  Matrix jac;
  for (std::size_t j = 0; j < x.size(); ++j) {
    probe[j] = x[j] + h;
    const auto up = f(probe);
    probe[j] = x[j] - h;
    const auto down = f(probe);
    probe[j] = x[j];
    require_finite(up, "fd_jacobian: f(x + h e_j) not finite");
    require_finite(down, "fd_jacobian: f(x - h e_j) not finite");
    if (up.size() != down.size()) throw Error(ErrorCode::ShapeMismatch, "fd_jacobian: output size varies");
    if (j == 0) jac = Matrix(up.size(), x.size());
    if (up.size() != jac.rows()) throw Error(ErrorCode::ShapeMismatch, "fd_jacobian: output size varies");
    for (std::size_t i = 0; i < up.size(); ++i) jac(i, j) = (up[i] - down[i]) / (2.0 * h);
  }
  return jac;
}

std::vector<double> fd_gradient(const std::function<double(std::span<const double>)>& f,
                                std::span<const double> x, double h) {
  const auto jac = fd_jacobian(
      [&](std::span<const double> p) { return std::vector<double>{f(p)}; }, x, h);
  return {jac.data().begin(), jac.data().end()};
}

double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

double norm_relative_error(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::ShapeMismatch, "norm_relative_error: size mismatch");
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max({scale, std::abs(a[i]), std::abs(b[i])});
  }
  return scale > 0.0 ? diff / scale : 0.0;
}

}  // namespace gradlore

#pragma once

// Independent reference computations used only by tests. Nothing here calls
// into the code paths it is used to check.

#include "gradlore/numerics/matrix.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace oracle {

/// Gaussian elimination with partial pivoting on a dense copy.
inline std::vector<double> gaussian_solve(const gradlore::Matrix& a, const std::vector<double>& b) {
  const std::size_t n = b.size();
  std::vector<std::vector<double>> m(n, std::vector<double>(n + 1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m[i][j] = a(i, j);
    m[i][n] = b[i];
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    if (m[piv][col] == 0.0) throw std::runtime_error("singular");
    std::swap(m[piv], m[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = m[r][col] / m[col][col];
      for (std::size_t c = col; c <= n; ++c) m[r][c] -= f * m[col][c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = m[i][n];
    for (std::size_t j = i + 1; j < n; ++j) s -= m[i][j] * x[j];
    x[i] = s / m[i][i];
  }
  return x;
}

/// Minimises a smooth convex function with damped Newton steps built from
/// central-difference gradients and Hessians. Slow but independent of any
/// closed form.
inline std::vector<double> numeric_minimise(const std::function<double(const std::vector<double>&)>& f,
                                            std::vector<double> x, int newton_steps = 8) {
  const std::size_t n = x.size();
  auto grad = [&](const std::vector<double>& p) {
    std::vector<double> g(n);
    auto q = p;
    for (std::size_t j = 0; j < n; ++j) {
      const double h = 1e-5 * std::max(1.0, std::abs(p[j]));
      q[j] = p[j] + h;
      const double up = f(q);
      q[j] = p[j] - h;
      const double down = f(q);
      q[j] = p[j];
      g[j] = (up - down) / (2 * h);
    }
    return g;
  };
  // Newton on an FD Hessian; exact for quadratics up to FD noise.
  for (int it = 0; it < newton_steps; ++it) {
    const auto g = grad(x);
    gradlore::Matrix hess(n, n);
    for (std::size_t j = 0; j < n; ++j) {
      const double h = 1e-4;
      auto xp = x;
      auto xm = x;
      xp[j] += h;
      xm[j] -= h;
      const auto gp = grad(xp);
      const auto gm = grad(xm);
      for (std::size_t i = 0; i < n; ++i) hess(i, j) = (gp[i] - gm[i]) / (2 * h);
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) hess(i, j) = hess(j, i) = 0.5 * (hess(i, j) + hess(j, i));
    const auto step = gaussian_solve(hess, g);
    // Backtracking keeps the objective non-increasing.
    double t = 1.0;
    const double f0 = f(x);
    for (int k = 0; k < 30; ++k, t *= 0.5) {
      auto trial = x;
      for (std::size_t i = 0; i < n; ++i) trial[i] -= t * step[i];
      if (f(trial) <= f0) {
        x = trial;
        break;
      }
    }
  }
  return x;
}

}  // namespace oracle

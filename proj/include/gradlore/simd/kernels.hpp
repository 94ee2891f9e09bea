#pragma once

// Dense inner-loop kernels with a scalar reference and vectorised variants.
//
// Every variant accumulates reductions in the same four-lane order
// ((l0 + l1) + (l2 + l3), then a sequential tail), and the build disables
// FMA contraction, so all backends return bit-identical results. That keeps
// experiment output byte-stable regardless of which backend the CPU selects.

#include <cstddef>
#include <span>
#include <string_view>

namespace gradlore::simd {

enum class Backend { scalar, avx2 };

struct KernelTable {
  Backend backend;
  std::string_view name;
  /// sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  /// y = W x + bias, W row-major rows x cols; bias may be null.
  void (*gemv)(const double* w, std::size_t rows, std::size_t cols, const double* x,
               const double* bias, double* y);
  /// y += W^T v
  void (*gemv_t_acc)(const double* w, std::size_t rows, std::size_t cols, const double* v,
                     double* y);
  /// A += u v^T
  void (*ger_acc)(double* a, std::size_t rows, std::size_t cols, const double* u,
                  const double* v);
};

const KernelTable& scalar_kernels();
/// Null when the variant was not compiled in.
const KernelTable* avx2_kernels();

bool cpu_supports(Backend backend);

/// Backend picked at first use: the widest one the CPU supports, unless the
/// GRADLORE_SIMD environment variable names another ("scalar", "avx2").
const KernelTable& active();

/// Overrides the active backend. Throws BadParams if unsupported here.
void select(Backend backend);

std::string_view to_string(Backend backend);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace gradlore::simd

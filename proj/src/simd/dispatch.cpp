#include "gradlore/error.hpp"
#include "gradlore/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace gradlore::simd {

#ifndef GRADLORE_HAVE_AVX2
const KernelTable* avx2_kernels() { return nullptr; }
#endif

namespace {

const KernelTable* table_for(Backend backend) {
  switch (backend) {
    case Backend::scalar: return &scalar_kernels();
    case Backend::avx2: return avx2_kernels();
  }
  return nullptr;
}

const KernelTable* detect() {
  if (const char* env = std::getenv("GRADLORE_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return &scalar_kernels();
    if (want == "avx2" && cpu_supports(Backend::avx2)) return avx2_kernels();
  }
  if (cpu_supports(Backend::avx2)) return avx2_kernels();
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{detect()};
  return table;
}

}  // namespace

bool cpu_supports(Backend backend) {
  if (table_for(backend) == nullptr) return false;
  switch (backend) {
    case Backend::scalar: return true;
    case Backend::avx2:
#if defined(__x86_64__) || defined(__i386__)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& active() { return *current().load(std::memory_order_relaxed); }

void select(Backend backend) {
  if (!cpu_supports(backend)) {
    throw Error(ErrorCode::BadParams, "simd::select: backend " + std::string(to_string(backend)) +
                                          " not available on this CPU");
  }
  current().store(table_for(backend), std::memory_order_relaxed);
}

std::string_view to_string(Backend backend) {
  switch (backend) {
    case Backend::scalar: return "scalar";
    case Backend::avx2: return "avx2";
  }
  return "unknown";
}

}  // namespace gradlore::simd

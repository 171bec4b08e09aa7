#include <atomic>
#include <cstdlib>
#include <string_view>

#include "agmonkit/simd.hpp"

namespace agmonkit::simd {

#ifdef AGMONKIT_HAVE_AVX2
const KernelTable* avx2_kernels_compiled();
#endif

const KernelTable* avx2_kernels() {
#ifdef AGMONKIT_HAVE_AVX2
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? avx2_kernels_compiled() : nullptr;
#else
  return nullptr;
#endif
}

namespace {

const KernelTable* select_default() {
  const char* env = std::getenv("AGMONKIT_SIMD");
  if (env && std::string_view(env) == "scalar") return &scalar_kernels();
  if (const KernelTable* t = avx2_kernels()) return t;
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& active() {
  static std::atomic<const KernelTable*> table{select_default()};
  return table;
}

}  // namespace

const KernelTable& kernels() { return *active().load(std::memory_order_acquire); }

void set_kernels(const KernelTable& table) { active().store(&table, std::memory_order_release); }

}  // namespace agmonkit::simd

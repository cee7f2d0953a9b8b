#include <atomic>
#include <cstdlib>
#include <string_view>

#include "sonar/kernels.hpp"

namespace sonar::kernels {

#if defined(SONAR_HAVE_AVX2)
const KernelTable& avx2_kernels();
#endif

const KernelTable* avx2_table() {
#if defined(SONAR_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &avx2_kernels() : nullptr;
#else
  return nullptr;
#endif
}

namespace {

const KernelTable* select() {
  if (const char* env = std::getenv("SONAR_ISA")) {
    if (std::string_view(env) == "scalar") return &scalar_table();
  }
  if (const KernelTable* t = avx2_table()) return t;
  return &scalar_table();
}

std::atomic<const KernelTable*>& slot() {
  static std::atomic<const KernelTable*> current{select()};
  return current;
}

}  // namespace

const KernelTable& active() { return *slot().load(std::memory_order_acquire); }

bool force(Isa isa) {
  const KernelTable* t = isa == Isa::Avx2 ? avx2_table() : &scalar_table();
  if (!t) return false;
  slot().store(t, std::memory_order_release);
  return true;
}

}  // namespace sonar::kernels

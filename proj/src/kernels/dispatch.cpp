#include <atomic>
#include <cstdlib>
#include <cstring>

#include "mtest/kernels.hpp"

namespace mtest {

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
  }
  return "unknown";
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2:
#if defined(MTEST_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& kernel_table(Isa isa) {
  if (!isa_available(isa))
    throw InvalidArgument("instruction set " + std::string(to_string(isa)) + " unavailable");
#if defined(MTEST_HAVE_AVX2)
  if (isa == Isa::avx2) return detail::avx2_kernels;
#endif
  return detail::scalar_kernels;
}

namespace {

Isa initial_isa() {
  const char* env = std::getenv("MTEST_ISA");
  if (env && std::strcmp(env, "scalar") == 0) return Isa::scalar;
  return isa_available(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{&kernel_table(initial_isa())};
  return slot;
}

}  // namespace

const KernelTable& kernels() { return *active_slot().load(std::memory_order_relaxed); }

Isa active_isa() { return kernels().isa; }

void set_isa(Isa isa) { active_slot().store(&kernel_table(isa), std::memory_order_relaxed); }

}  // namespace mtest

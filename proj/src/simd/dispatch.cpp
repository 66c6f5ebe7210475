#include <atomic>
#include <cstdlib>
#include <string_view>

#include "evtrace/simd/kernels.hpp"

namespace evtrace::simd {

// Defined in kernels_avx2.cpp; null when compiled without AVX2 support.
const Kernels* avx2_table();

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const Kernels* initial_choice() {
  const char* env = std::getenv("EVTRACE_SIMD");
  if (env != nullptr && std::string_view(env) == "scalar") return &scalar_kernels();
  if (const Kernels* k = avx2_kernels()) return k;
  return &scalar_kernels();
}

std::atomic<const Kernels*>& active() {
  static std::atomic<const Kernels*> table{initial_choice()};
  return table;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

const Kernels* avx2_kernels() {
  static const Kernels* table = cpu_has_avx2() ? avx2_table() : nullptr;
  return table;
}

const Kernels& kernels() { return *active().load(std::memory_order_acquire); }

bool select_isa(Isa isa) {
  const Kernels* k = isa == Isa::avx2 ? avx2_kernels() : &scalar_kernels();
  if (k == nullptr) return false;
  active().store(k, std::memory_order_release);
  return true;
}

}  // namespace evtrace::simd

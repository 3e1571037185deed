#include <cstdlib>
#include <string_view>

#include "occamnet/kernels.hpp"

namespace occamnet::kernels {

#ifndef OCCAMNET_HAVE_AVX2
const KernelTable* avx2_table() { return nullptr; }
#endif

bool cpu_supports_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

const KernelTable& resolve() {
  if (const char* forced = std::getenv("OCCAMNET_SIMD"); forced && std::string_view(forced) == "scalar") {
    return scalar_table();
  }
  if (const KernelTable* avx = avx2_table(); avx && cpu_supports_avx2()) return *avx;
  return scalar_table();
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& table = resolve();
  return table;
}

}  // namespace occamnet::kernels

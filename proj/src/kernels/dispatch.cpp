#include <atomic>
#include <cstdlib>
#include <string>

#include "kernels_internal.hpp"

namespace mld::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(__GNUC__) && (defined(__x86_64__) || defined(__i386__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable* best_available() {
  if (const KernelTable* t = avx2_table()) return t;
  return &scalar_table();
}

const KernelTable* initial_table() {
  const char* env = std::getenv("MLD_KERNELS");
  if (env != nullptr && std::string(env) == "scalar") return &scalar_table();
  return best_available();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

}  // namespace

const KernelTable* avx2_table() {
#if defined(MLD_BUILD_AVX2)
  static const bool supported = cpu_has_avx2();
  return supported ? &avx2_table_impl() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

bool select(std::string_view name) {
  const KernelTable* table = nullptr;
  if (name == "scalar") {
    table = &scalar_table();
  } else if (name == "avx2") {
    table = avx2_table();
  } else if (name == "auto") {
    table = best_available();
  }
  if (table == nullptr) return false;
  current().store(table, std::memory_order_release);
  return true;
}

}  // namespace mld::kernels

#include "kernels_impl.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace signbridge::kernels {

namespace {

constexpr KernelTable kScalar{Isa::scalar, &scalar::dot, &scalar::axpy,
                              &scalar::sad_u8, &scalar::blend_u8, &scalar::scale_u8};

#if defined(SIGNBRIDGE_BUILD_AVX2)
constexpr KernelTable kAvx2{Isa::avx2, &avx2::dot, &avx2::axpy,
                            &avx2::sad_u8, &avx2::blend_u8, &avx2::scale_u8};
#endif

bool cpu_has_avx2() {
#if defined(SIGNBRIDGE_BUILD_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable* select_default() {
  if (const char* env = std::getenv("SIGNBRIDGE_ISA"); env && std::string(env) == "scalar") {
    return &kScalar;
  }
  if (const KernelTable* t = table_for(Isa::avx2)) return t;
  return &kScalar;
}

std::atomic<const KernelTable*> g_active{nullptr};

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
  }
  return "unknown";
}

const KernelTable& scalar_table() { return kScalar; }

const KernelTable* table_for(Isa isa) {
  switch (isa) {
    case Isa::scalar: return &kScalar;
    case Isa::avx2:
#if defined(SIGNBRIDGE_BUILD_AVX2)
      return cpu_has_avx2() ? &kAvx2 : nullptr;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

bool isa_available(Isa isa) { return table_for(isa) != nullptr; }

const KernelTable& active() {
  const KernelTable* t = g_active.load(std::memory_order_acquire);
  if (!t) {
    t = select_default();
    g_active.store(t, std::memory_order_release);
  }
  return *t;
}

void force_isa(Isa isa) {
  const KernelTable* t = table_for(isa);
  if (!t) throw std::invalid_argument("kernel ISA not available: " + std::string(isa_name(isa)));
  g_active.store(t, std::memory_order_release);
}

void reset_isa() { g_active.store(select_default(), std::memory_order_release); }

}  // namespace signbridge::kernels

#pragma once

// Data-parallel inner loops shared by the CNN, the image utilities and the
// frame interpolator. Every kernel has a scalar reference implementation; SIMD
// variants are selected at runtime and must agree with it (bit-exactly for the
// integer and rounding kernels, to reduction-order rounding for dot).

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace signbridge::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

struct KernelTable {
  Isa isa;
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // sum of |a - b| over a w x h block
  std::uint32_t (*sad_u8)(const std::uint8_t* a, std::ptrdiff_t stride_a,
                          const std::uint8_t* b, std::ptrdiff_t stride_b,
                          int w, int h);
  // out[i] = floor((1 - t) * a[i] + t * b[i] + 0.5)
  void (*blend_u8)(const std::uint8_t* a, const std::uint8_t* b, double t,
                   std::uint8_t* out, std::size_t n);
  // out[i] = clamp(floor(alpha * in[i] + 0.5), 0, 255)
  void (*scale_u8)(const std::uint8_t* in, double alpha, std::uint8_t* out,
                   std::size_t n);
};

const KernelTable& scalar_table();

// nullptr when the variant was not compiled in or the CPU lacks support.
const KernelTable* table_for(Isa isa);

bool isa_available(Isa isa);

// Best available table. SIGNBRIDGE_ISA=scalar in the environment pins the
// reference kernels.
const KernelTable& active();

// Test hook; throws std::invalid_argument if the ISA is unavailable.
void force_isa(Isa isa);
void reset_isa();

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace signbridge::kernels

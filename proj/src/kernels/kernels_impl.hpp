#pragma once

#include "signbridge/kernels/kernels.hpp"

namespace signbridge::kernels {

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
std::uint32_t sad_u8(const std::uint8_t* a, std::ptrdiff_t stride_a,
                     const std::uint8_t* b, std::ptrdiff_t stride_b, int w, int h);
void blend_u8(const std::uint8_t* a, const std::uint8_t* b, double t,
              std::uint8_t* out, std::size_t n);
void scale_u8(const std::uint8_t* in, double alpha, std::uint8_t* out, std::size_t n);
}  // namespace scalar

#if defined(SIGNBRIDGE_BUILD_AVX2)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
std::uint32_t sad_u8(const std::uint8_t* a, std::ptrdiff_t stride_a,
                     const std::uint8_t* b, std::ptrdiff_t stride_b, int w, int h);
void blend_u8(const std::uint8_t* a, const std::uint8_t* b, double t,
              std::uint8_t* out, std::size_t n);
void scale_u8(const std::uint8_t* in, double alpha, std::uint8_t* out, std::size_t n);
}  // namespace avx2
#endif

}  // namespace signbridge::kernels

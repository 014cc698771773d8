// Compiled with -mavx2; only reached through the dispatch table after a CPU
// feature check.

#include "kernels_impl.hpp"

#include <immintrin.h>

#include <cmath>
#include <cstdlib>
#include <cstring>

namespace signbridge::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

inline __m256d load4_u8(const std::uint8_t* p) {
  std::int32_t raw;
  std::memcpy(&raw, p, 4);
  return _mm256_cvtepi32_pd(_mm_cvtepu8_epi32(_mm_cvtsi32_si128(raw)));
}

inline void store4_u8(__m256d v, std::uint8_t* p) {
  const __m256d lo = _mm256_setzero_pd();
  const __m256d hi = _mm256_set1_pd(255.0);
  v = _mm256_min_pd(_mm256_max_pd(v, lo), hi);
  __m128i i32 = _mm256_cvttpd_epi32(v);
  __m128i i16 = _mm_packus_epi32(i32, i32);
  __m128i u8 = _mm_packus_epi16(i16, i16);
  std::int32_t raw = _mm_cvtsi128_si32(u8);
  std::memcpy(p, &raw, 4);
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4)));
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

std::uint32_t sad_u8(const std::uint8_t* a, std::ptrdiff_t stride_a,
                     const std::uint8_t* b, std::ptrdiff_t stride_b, int w, int h) {
  std::uint64_t total = 0;
  for (int y = 0; y < h; ++y) {
    const std::uint8_t* ra = a + y * stride_a;
    const std::uint8_t* rb = b + y * stride_b;
    int x = 0;
    __m256i acc = _mm256_setzero_si256();
    for (; x + 32 <= w; x += 32) {
      __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(ra + x));
      __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(rb + x));
      acc = _mm256_add_epi64(acc, _mm256_sad_epu8(va, vb));
    }
    __m128i acc128 = _mm_add_epi64(_mm256_castsi256_si128(acc), _mm256_extracti128_si256(acc, 1));
    for (; x + 16 <= w; x += 16) {
      __m128i va = _mm_loadu_si128(reinterpret_cast<const __m128i*>(ra + x));
      __m128i vb = _mm_loadu_si128(reinterpret_cast<const __m128i*>(rb + x));
      acc128 = _mm_add_epi64(acc128, _mm_sad_epu8(va, vb));
    }
    for (; x + 8 <= w; x += 8) {
      __m128i va = _mm_loadl_epi64(reinterpret_cast<const __m128i*>(ra + x));
      __m128i vb = _mm_loadl_epi64(reinterpret_cast<const __m128i*>(rb + x));
      acc128 = _mm_add_epi64(acc128, _mm_sad_epu8(va, vb));
    }
    total += static_cast<std::uint64_t>(_mm_cvtsi128_si64(acc128)) +
             static_cast<std::uint64_t>(_mm_extract_epi64(acc128, 1));
    for (; x < w; ++x) total += static_cast<std::uint64_t>(std::abs(int(ra[x]) - int(rb[x])));
  }
  return static_cast<std::uint32_t>(total);
}

void blend_u8(const std::uint8_t* a, const std::uint8_t* b, double t,
              std::uint8_t* out, std::size_t n) {
  const double w0s = 1.0 - t;
  const __m256d w0 = _mm256_set1_pd(w0s);
  const __m256d w1 = _mm256_set1_pd(t);
  const __m256d half = _mm256_set1_pd(0.5);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_add_pd(_mm256_mul_pd(w0, load4_u8(a + i)), _mm256_mul_pd(w1, load4_u8(b + i)));
    store4_u8(_mm256_floor_pd(_mm256_add_pd(v, half)), out + i);
  }
  for (; i < n; ++i) {
    double v = std::floor(w0s * double(a[i]) + t * double(b[i]) + 0.5);
    out[i] = static_cast<std::uint8_t>(v < 0.0 ? 0.0 : (v > 255.0 ? 255.0 : v));
  }
}

void scale_u8(const std::uint8_t* in, double alpha, std::uint8_t* out, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  const __m256d half = _mm256_set1_pd(0.5);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    store4_u8(_mm256_floor_pd(_mm256_add_pd(_mm256_mul_pd(va, load4_u8(in + i)), half)), out + i);
  }
  for (; i < n; ++i) {
    double v = std::floor(alpha * double(in[i]) + 0.5);
    out[i] = static_cast<std::uint8_t>(v < 0.0 ? 0.0 : (v > 255.0 ? 255.0 : v));
  }
}

}  // namespace signbridge::kernels::avx2

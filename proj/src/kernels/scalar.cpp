#include "kernels_impl.hpp"

#include <cmath>
#include <cstdlib>

namespace signbridge::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

std::uint32_t sad_u8(const std::uint8_t* a, std::ptrdiff_t stride_a,
                     const std::uint8_t* b, std::ptrdiff_t stride_b, int w, int h) {
  std::uint32_t acc = 0;
  for (int y = 0; y < h; ++y) {
    const std::uint8_t* ra = a + y * stride_a;
    const std::uint8_t* rb = b + y * stride_b;
    for (int x = 0; x < w; ++x) acc += static_cast<std::uint32_t>(std::abs(int(ra[x]) - int(rb[x])));
  }
  return acc;
}

void blend_u8(const std::uint8_t* a, const std::uint8_t* b, double t,
              std::uint8_t* out, std::size_t n) {
  const double w0 = 1.0 - t;
  for (std::size_t i = 0; i < n; ++i) {
    double v = std::floor(w0 * double(a[i]) + t * double(b[i]) + 0.5);
    out[i] = static_cast<std::uint8_t>(v < 0.0 ? 0.0 : (v > 255.0 ? 255.0 : v));
  }
}

void scale_u8(const std::uint8_t* in, double alpha, std::uint8_t* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double v = std::floor(alpha * double(in[i]) + 0.5);
    out[i] = static_cast<std::uint8_t>(v < 0.0 ? 0.0 : (v > 255.0 ? 255.0 : v));
  }
}

}  // namespace signbridge::kernels::scalar

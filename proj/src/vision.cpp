#include "signbridge/vision.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <utility>

#include "signbridge/kernels/kernels.hpp"
#include "signbridge/rng.hpp"

namespace signbridge {

namespace {

std::uint8_t clamp_round(double v) {
  v = std::floor(v + 0.5);
  return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
}

}  // namespace

std::array<std::uint64_t, 256> histogram(const GrayImage& img) {
  std::array<std::uint64_t, 256> h{};
  for (std::uint8_t p : img.pixels()) ++h[p];
  return h;
}

HistogramStats otsu_stats(const GrayImage& img) {
  const auto hist = histogram(img);
  const auto n = static_cast<std::uint64_t>(img.pixels().size());
  std::uint64_t total_sum = 0;
  for (int v = 0; v < 256; ++v) total_sum += hist[v] * static_cast<std::uint64_t>(v);

  HistogramStats s;
  std::uint64_t c0 = 0;
  std::uint64_t s0 = 0;
  for (int t = 0; t < 256; ++t) {
    c0 += hist[t];
    s0 += hist[t] * static_cast<std::uint64_t>(t);
    const std::uint64_t c1 = n - c0;
    const std::uint64_t s1 = total_sum - s0;
    s.omega0[t] = static_cast<double>(c0) / static_cast<double>(n);
    s.omega1[t] = static_cast<double>(c1) / static_cast<double>(n);
    s.mu0[t] = c0 ? static_cast<double>(s0) / static_cast<double>(c0) : 0.0;
    s.mu1[t] = c1 ? static_cast<double>(s1) / static_cast<double>(c1) : 0.0;
    if (c0 == 0 || c1 == 0) {
      s.between_var[t] = 0.0;
    } else {
      const double d = s.mu0[t] - s.mu1[t];
      s.between_var[t] = s.omega0[t] * s.omega1[t] * d * d;
    }
  }
  return s;
}

namespace {

using u128 = unsigned __int128;

// a * b as (high part, low 64 bits); a < 2^128, b < 2^64.
std::pair<u128, std::uint64_t> mul_wide(u128 a, std::uint64_t b) {
  const u128 lo = static_cast<u128>(static_cast<std::uint64_t>(a)) * b;
  const u128 hi = static_cast<u128>(static_cast<std::uint64_t>(a >> 64)) * b;
  return {hi + (lo >> 64), static_cast<std::uint64_t>(lo)};
}

}  // namespace

int otsu_threshold(const GrayImage& img) {
  // sigma_B^2(t) = (S0 N - S n0)^2 / (N^2 n0 n1); compared exactly as fractions
  // so that equal variances tie exactly and the lowest t wins.
  const auto hist = histogram(img);
  const std::uint64_t n = img.pixels().size();
  if (n >= (std::uint64_t{1} << 28)) throw std::invalid_argument("otsu_threshold: image too large");
  std::uint64_t total = 0;
  for (int v = 0; v < 256; ++v) total += hist[v] * static_cast<std::uint64_t>(v);

  int best = -1;
  u128 best_num = 0;
  std::uint64_t best_den = 1;
  std::uint64_t c0 = 0, s0 = 0;
  for (int t = 0; t < 256; ++t) {
    c0 += hist[t];
    s0 += hist[t] * static_cast<std::uint64_t>(t);
    const std::uint64_t c1 = n - c0;
    if (c0 == 0 || c1 == 0) continue;
    const __int128 d = static_cast<__int128>(s0) * n - static_cast<__int128>(total) * c0;
    const u128 ad = static_cast<u128>(d < 0 ? -d : d);
    const u128 num = ad * ad;  // |d| < 2^64 for n < 2^28
    const std::uint64_t den = c0 * c1;
    if (best < 0 || mul_wide(num, best_den) > mul_wide(best_num, den)) {
      best = t;
      best_num = num;
      best_den = den;
    }
  }
  if (best < 0 || best_num == 0) return img.pixels()[0];
  return best;
}

GrayImage binarize(const GrayImage& img, int t) {
  if (t < 0 || t > 255) throw std::invalid_argument("binarize: threshold outside [0, 255]");
  GrayImage out(img.width(), img.height());
  auto src = img.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] > t ? 255 : 0;
  return out;
}

GrayImage flip_h(const GrayImage& img) {
  GrayImage out(img.width(), img.height());
  const int w = img.width();
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < w; ++x) out.at(x, y) = img.at(w - 1 - x, y);
  }
  return out;
}

GrayImage adjust_brightness(const GrayImage& img, double alpha) {
  if (!(alpha >= 0.8 && alpha <= 1.2)) {
    throw std::invalid_argument("adjust_brightness: alpha must lie in [0.8, 1.2]");
  }
  GrayImage out(img.width(), img.height());
  kernels::active().scale_u8(img.pixels().data(), alpha, out.pixels().data(), img.pixels().size());
  return out;
}

GrayImage add_gaussian_noise(const GrayImage& img, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("add_gaussian_noise: sigma must be >= 0");
  if (sigma == 0.0) return img;
  Rng rng = make_rng(seed, "gaussian-noise");
  std::normal_distribution<double> noise(0.0, sigma);
  GrayImage out(img.width(), img.height());
  auto src = img.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = clamp_round(double(src[i]) + noise(rng));
  return out;
}

GrayImage augment(const GrayImage& img, const AugmentParams& params, bool flip, std::uint64_t seed) {
  GrayImage out = flip ? flip_h(img) : img;
  if (params.brightness != 1.0) out = adjust_brightness(out, params.brightness);
  return add_gaussian_noise(out, params.noise_sigma, seed);
}

GrayImage resize(const GrayImage& img, int width, int height) {
  if (width < 1 || height < 1) throw std::invalid_argument("resize: target dimensions must be >= 1");
  if (width == img.width() && height == img.height()) return img;
  GrayImage out(width, height);
  const double sx = width > 1 ? double(img.width() - 1) / double(width - 1) : 0.0;
  const double sy = height > 1 ? double(img.height() - 1) / double(height - 1) : 0.0;
  for (int y = 0; y < height; ++y) {
    const double fy = y * sy;
    const int y0 = std::min(static_cast<int>(fy), img.height() - 1);
    const int y1 = std::min(y0 + 1, img.height() - 1);
    const double wy = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = x * sx;
      const int x0 = std::min(static_cast<int>(fx), img.width() - 1);
      const int x1 = std::min(x0 + 1, img.width() - 1);
      const double wx = fx - x0;
      const double top = (1.0 - wx) * img.at(x0, y0) + wx * img.at(x1, y0);
      const double bottom = (1.0 - wx) * img.at(x0, y1) + wx * img.at(x1, y1);
      out.at(x, y) = clamp_round((1.0 - wy) * top + wy * bottom);
    }
  }
  return out;
}

}  // namespace signbridge

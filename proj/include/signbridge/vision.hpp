#pragma once

#include <array>
#include <cstdint>

#include "signbridge/image.hpp"

namespace signbridge {

// Otsu statistics for every candidate threshold t; class 0 is pixels <= t.
struct HistogramStats {
  std::array<double, 256> omega0{};
  std::array<double, 256> omega1{};
  std::array<double, 256> mu0{};
  std::array<double, 256> mu1{};
  std::array<double, 256> between_var{};
};

struct AugmentParams {
  double brightness = 1.0;  // in [0.8, 1.2]
  double noise_sigma = 0.0;
};

std::array<std::uint64_t, 256> histogram(const GrayImage& img);

HistogramStats otsu_stats(const GrayImage& img);

// argmax_t of the between-class variance, lowest t on ties. A constant image
// returns its pixel value.
int otsu_threshold(const GrayImage& img);

// pixel > t -> 255, else 0
GrayImage binarize(const GrayImage& img, int t);

// Mirror about the vertical axis: out(x, y) = in(w - 1 - x, y).
GrayImage flip_h(const GrayImage& img);

// clamp(round(alpha * in)); alpha outside [0.8, 1.2] throws std::invalid_argument.
GrayImage adjust_brightness(const GrayImage& img, double alpha);

// clamp(round(in + n)), n ~ N(0, sigma^2), deterministic in seed.
GrayImage add_gaussian_noise(const GrayImage& img, double sigma, std::uint64_t seed);

GrayImage augment(const GrayImage& img, const AugmentParams& params, bool flip, std::uint64_t seed);

// Bilinear resampling with corner-aligned sample positions.
GrayImage resize(const GrayImage& img, int width, int height);

}  // namespace signbridge

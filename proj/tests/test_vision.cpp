#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>
#include <random>

#include "signbridge/error.hpp"
#include "signbridge/image.hpp"
#include "signbridge/vision.hpp"

using namespace signbridge;

namespace {

GrayImage random_image(std::mt19937_64& rng, int w, int h) {
  // Mixtures of a few gray levels produce real ties and multimodal histograms.
  std::uniform_int_distribution<int> levels(1, 6), v(0, 255), mode(0, 2);
  std::vector<int> palette(std::size_t(levels(rng)));
  for (auto& p : palette) p = v(rng);
  const int m = mode(rng);
  std::vector<std::uint8_t> px(std::size_t(w) * h);
  std::uniform_int_distribution<std::size_t> pick(0, palette.size() - 1);
  for (auto& p : px) p = static_cast<std::uint8_t>(m == 0 ? v(rng) : palette[pick(rng)]);
  return GrayImage(w, h, std::move(px));
}

// Brute force over the pixels for every threshold; compares variances as exact
// fractions (S0 N - S n0)^2 / (n0 n1).
int otsu_oracle(const GrayImage& img) {
  const auto px = img.pixels();
  const __int128 n = __int128(px.size());
  int best = -1;
  __int128 bnum = 0, bden = 1;
  for (int t = 0; t < 256; ++t) {
    __int128 n0 = 0, s0 = 0, s = 0;
    for (auto p : px) {
      s += p;
      if (p <= t) {
        ++n0;
        s0 += p;
      }
    }
    const __int128 n1 = n - n0;
    if (n0 == 0 || n1 == 0) continue;
    const __int128 d = s0 * n - s * n0;
    const __int128 num = d * d, den = n0 * n1;
    if (best < 0 || num * bden > bnum * den) {
      best = t;
      bnum = num;
      bden = den;
    }
  }
  return best < 0 || bnum == 0 ? px[0] : best;
}

}  // namespace

TEST_CASE("otsu on the four-pixel example") {
  const GrayImage img(2, 2, std::vector<std::uint8_t>{10, 10, 10, 200});
  const auto s = otsu_stats(img);
  for (int t = 10; t < 200; ++t) CHECK(s.between_var[t] == doctest::Approx(0.75 * 0.25 * 190.0 * 190.0));
  CHECK(s.between_var[10] == doctest::Approx(6768.75));
  CHECK(s.between_var[9] == 0.0);
  CHECK(otsu_threshold(img) == 10);
}

TEST_CASE("otsu stats invariants") {
  std::mt19937_64 rng(21);
  for (int k = 0; k < 10; ++k) {
    const auto s = otsu_stats(random_image(rng, 17, 9));
    for (int t = 0; t < 256; ++t) {
      CHECK(s.omega0[t] + s.omega1[t] == doctest::Approx(1.0));
      if (t) CHECK(s.omega0[t] >= s.omega0[t - 1]);
    }
  }
}

TEST_CASE("constant image thresholds at its value and binarizes to background") {
  for (int v : {0, 77, 255}) {
    const GrayImage img(5, 4, std::uint8_t(v));
    CHECK(otsu_threshold(img) == v);
    const auto b = binarize(img, otsu_threshold(img));
    CHECK(std::all_of(b.pixels().begin(), b.pixels().end(), [](auto p) { return p == 0; }));
  }
}

TEST_CASE("property: otsu equals the exhaustive oracle on random images") {
  std::mt19937_64 rng(22);
  for (int k = 0; k < 300; ++k) {
    std::uniform_int_distribution<int> dim(1, 40);
    const auto img = random_image(rng, dim(rng), dim(rng));
    CHECK(otsu_threshold(img) == otsu_oracle(img));
  }
}

TEST_CASE("binarize") {
  const GrayImage img(4, 1, std::vector<std::uint8_t>{10, 10, 10, 200});
  CHECK(binarize(img, 255) == GrayImage(4, 1, 0));
  CHECK(binarize(img, 0) == GrayImage(4, 1, 255));
  const auto b = binarize(img, 100);
  CHECK(b == GrayImage(4, 1, std::vector<std::uint8_t>{0, 0, 0, 255}));
  CHECK(binarize(b, 0) == b);
  CHECK(binarize(b, 254) == b);
  CHECK_THROWS_AS(binarize(img, 256), std::invalid_argument);
  CHECK_THROWS_AS(binarize(img, -1), std::invalid_argument);
}

TEST_CASE("flip_h") {
  const GrayImage abc(3, 1, std::vector<std::uint8_t>{1, 2, 3});
  CHECK(flip_h(abc) == GrayImage(3, 1, std::vector<std::uint8_t>{3, 2, 1}));
  const GrayImage column(1, 5, std::vector<std::uint8_t>{1, 2, 3, 4, 5});
  CHECK(flip_h(column) == column);
  std::mt19937_64 rng(23);
  for (int k = 0; k < 20; ++k) {
    const auto img = random_image(rng, 13, 7);
    const auto f = flip_h(img);
    CHECK(flip_h(f) == img);
    auto a = std::vector<std::uint8_t>(img.pixels().begin(), img.pixels().end());
    auto b = std::vector<std::uint8_t>(f.pixels().begin(), f.pixels().end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);
  }
}

TEST_CASE("brightness") {
  const GrayImage img(3, 1, std::vector<std::uint8_t>{100, 250, 3});
  CHECK(adjust_brightness(img, 1.0) == img);
  const auto up = adjust_brightness(img, 1.2);
  CHECK(up.at(1, 0) == 255);
  CHECK(up.at(0, 0) == 120);
  CHECK(adjust_brightness(img, 0.8).at(0, 0) == 80);
  CHECK(adjust_brightness(img, 0.8).at(2, 0) == 2);  // 2.4 -> 2
  CHECK(adjust_brightness(GrayImage(1, 1, 5), 0.9).at(0, 0) == 5);  // 4.5 rounds half up
  CHECK_THROWS_AS(adjust_brightness(img, 0.79), std::invalid_argument);
  CHECK_THROWS_AS(adjust_brightness(img, 1.21), std::invalid_argument);
}

TEST_CASE("gaussian noise") {
  const GrayImage gray(256, 256, 128);
  CHECK(add_gaussian_noise(gray, 0.0, 1) == gray);
  const auto a = add_gaussian_noise(gray, 10.0, 7);
  CHECK(a == add_gaussian_noise(gray, 10.0, 7));
  CHECK(a != add_gaussian_noise(gray, 10.0, 8));
  // Folded normal: E|N(0, s^2)| = s sqrt(2 / pi); rounding adds ~1/(12 s) bias.
  double mad = 0;
  for (auto p : a.pixels()) mad += std::abs(int(p) - 128);
  mad /= double(a.pixels().size());
  CHECK(mad == doctest::Approx(10.0 * std::sqrt(2.0 / M_PI)).epsilon(0.05));
  CHECK_THROWS_AS(add_gaussian_noise(gray, -1.0, 0), std::invalid_argument);
}

TEST_CASE("augment preserves dimensions") {
  std::mt19937_64 rng(24);
  const auto img = random_image(rng, 11, 6);
  const auto out = augment(img, AugmentParams{1.1, 3.0}, true, 5);
  CHECK(out.width() == 11);
  CHECK(out.height() == 6);
  CHECK(augment(img, AugmentParams{1.0, 0.0}, false, 5) == img);
  CHECK(augment(img, AugmentParams{1.0, 0.0}, true, 5) == flip_h(img));
}

TEST_CASE("resize") {
  const GrayImage two(2, 1, std::vector<std::uint8_t>{0, 255});
  CHECK(resize(two, 3, 1) == GrayImage(3, 1, std::vector<std::uint8_t>{0, 128, 255}));
  std::mt19937_64 rng(25);
  const auto img = random_image(rng, 9, 5);
  CHECK(resize(img, 9, 5) == img);
  const auto c = resize(GrayImage(7, 3, 42), 20, 11);
  CHECK(c == GrayImage(20, 11, 42));
  // corner-aligned: corners are preserved
  const auto big = resize(img, 31, 17);
  CHECK(big.at(0, 0) == img.at(0, 0));
  CHECK(big.at(30, 16) == img.at(8, 4));
  CHECK(big.at(30, 0) == img.at(8, 0));
  CHECK_THROWS_AS(resize(img, 0, 3), std::invalid_argument);
}

TEST_CASE("pgm encode and decode") {
  std::mt19937_64 rng(26);
  const auto img = random_image(rng, 13, 4);
  CHECK(decode_pgm(encode_pgm(img)) == img);
  const std::string p2 = "P2\n# comment\n3 1\n255\n0 128 255\n";
  CHECK(decode_pgm(std::vector<std::uint8_t>(p2.begin(), p2.end())) ==
        GrayImage(3, 1, std::vector<std::uint8_t>{0, 128, 255}));
  std::string p6 = "P6 1 1 255\n";
  p6 += std::string{char(255), char(0), char(0)};
  const auto red = decode_pgm(std::vector<std::uint8_t>(p6.begin(), p6.end()));
  CHECK(red.at(0, 0) == 76);  // (299 * 255 + 500) / 1000
  const std::string bad = "P5\n2 2\n255\n\x01";
  CHECK_THROWS_AS(decode_pgm(std::vector<std::uint8_t>(bad.begin(), bad.end())), DataError);
  CHECK_THROWS_AS(read_pgm("/nonexistent/x.pgm"), DataError);
}

#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <limits>
#include <random>

#include "signbridge/error.hpp"
#include "signbridge/landmarks.hpp"

using namespace signbridge;

namespace {

LandmarkFrame zero_frame() {
  LandmarkFrame f;
  f.points.resize(kLandmarkCount);
  return f;
}

FeatureVector random_vector(std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.3, 2.0);
  FeatureVector v;
  for (std::size_t j = 0; j < kFeatureCount; ++j) v[j] = d(rng);
  return v;
}

}  // namespace

TEST_CASE("flatten places point i at 3(i-1)") {
  CHECK(flatten(zero_frame()) == FeatureVector{});
  auto f = zero_frame();
  f.points[0] = {0.5, 0.2, 0.0};
  f.points[41] = {1.0, 2.0, 3.0};
  const auto v = flatten(f);
  CHECK(v[0] == 0.5);
  CHECK(v[1] == 0.2);
  CHECK(v[2] == 0.0);
  CHECK(v[123] == 1.0);
  CHECK(v[125] == 3.0);
  const auto back = unflatten(v);
  CHECK(flatten(back) == v);
}

TEST_CASE("frame structure is enforced") {
  auto f = zero_frame();
  f.points.pop_back();
  CHECK_THROWS_AS(flatten(f), std::invalid_argument);
  f = zero_frame();
  f.points[3].y = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(flatten(f), std::invalid_argument);
  std::vector<double> short_values(125, 0.0);
  CHECK_THROWS_AS(FeatureVector{short_values}, std::invalid_argument);
}

TEST_CASE("fit_scaler uses the population standard deviation") {
  FeatureVector a, b;
  a[0] = 0.0;
  b[0] = 2.0;
  for (std::size_t j = 1; j < kFeatureCount; ++j) a[j] = b[j] = 5.0;
  std::vector<FeatureVector> data{a, b};
  const auto p = fit_scaler(data);
  CHECK(p.mu[0] == 1.0);
  CHECK(p.sigma[0] == 1.0);  // sqrt(((0-1)^2 + (2-1)^2) / 2)
  CHECK(p.mu[7] == 5.0);
  CHECK(p.sigma[7] == 1.0);  // guard
  CHECK(apply_scaler(p, a)[0] == -1.0);
  CHECK(apply_scaler(p, b)[0] == 1.0);
  CHECK(apply_scaler(p, a)[7] == 0.0);

  std::vector<FeatureVector> three(3, a);
  three[1][0] = 1.0;
  three[2][0] = 5.0;
  const auto q = fit_scaler(three);  // mean 2, variance (4 + 1 + 9) / 3
  CHECK(q.sigma[0] == doctest::Approx(std::sqrt(14.0 / 3.0)).epsilon(1e-15));
}

TEST_CASE("fit_scaler degenerate inputs") {
  CHECK_THROWS_AS(fit_scaler({}), std::invalid_argument);
  std::mt19937_64 rng(9);
  std::vector<FeatureVector> one{random_vector(rng)};
  const auto p = fit_scaler(one);
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    CHECK(p.mu[j] == one[0][j]);
    CHECK(p.sigma[j] == 1.0);
  }
  CHECK(apply_scaler(p, one[0]) == FeatureVector{});
}

TEST_CASE("property: fitted training columns have mean 0 and std 1") {
  std::mt19937_64 rng(11);
  std::vector<FeatureVector> data;
  for (int i = 0; i < 57; ++i) data.push_back(random_vector(rng));
  for (auto& v : data) v[10] = 4.25;  // constant column
  const auto p = fit_scaler(data);
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    long double sum = 0, sq = 0;
    for (const auto& v : data) sum += apply_scaler(p, v)[j];
    const long double mean = sum / data.size();
    for (const auto& v : data) sq += (apply_scaler(p, v)[j] - mean) * (apply_scaler(p, v)[j] - mean);
    CHECK(std::abs(double(mean)) < 1e-9);
    const double sd = std::sqrt(double(sq / data.size()));
    if (j == 10) CHECK(sd == 0.0);
    else CHECK(sd == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("property: apply_scaler is affine") {
  std::mt19937_64 rng(12);
  std::vector<FeatureVector> data;
  for (int i = 0; i < 20; ++i) data.push_back(random_vector(rng));
  const auto p = fit_scaler(data);
  for (int trial = 0; trial < 50; ++trial) {
    const auto v1 = random_vector(rng), v2 = random_vector(rng);
    const double a = std::uniform_real_distribution<double>(-1.0, 2.0)(rng);
    FeatureVector mix;
    for (std::size_t j = 0; j < kFeatureCount; ++j) mix[j] = a * v1[j] + (1 - a) * v2[j];
    const auto lhs = apply_scaler(p, mix), s1 = apply_scaler(p, v1), s2 = apply_scaler(p, v2);
    for (std::size_t j = 0; j < kFeatureCount; ++j)
      CHECK(lhs[j] == doctest::Approx(a * s1[j] + (1 - a) * s2[j]).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("scaler files round-trip and reject corruption") {
  std::mt19937_64 rng(13);
  std::vector<FeatureVector> data{random_vector(rng), random_vector(rng), random_vector(rng)};
  const auto p = fit_scaler(data);
  auto bytes = serialize_scaler(p);
  const auto q = deserialize_scaler(bytes);
  CHECK(q.mu == p.mu);
  CHECK(q.sigma == p.sigma);
  bytes.pop_back();
  CHECK_THROWS_AS(deserialize_scaler(bytes), DataError);
  CHECK_THROWS_AS(deserialize_scaler(std::vector<std::uint8_t>{'X'}), DataError);
}

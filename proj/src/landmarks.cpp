#include "signbridge/landmarks.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "signbridge/binary_io.hpp"

namespace signbridge {

void LandmarkFrame::validate() const {
  if (points.size() != kLandmarkCount) {
    throw std::invalid_argument("landmark frame needs " + std::to_string(kLandmarkCount) +
                                " points, got " + std::to_string(points.size()));
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
      throw std::invalid_argument("landmark " + std::to_string(i + 1) + " has a non-finite coordinate");
    }
  }
}

FeatureVector::FeatureVector(std::span<const double> values) {
  if (values.size() != kFeatureCount) {
    throw std::invalid_argument("feature vector needs " + std::to_string(kFeatureCount) +
                                " values, got " + std::to_string(values.size()));
  }
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (!std::isfinite(values[i])) throw std::invalid_argument("feature vector has a non-finite value");
    values_[i] = values[i];
  }
}

FeatureVector flatten(const LandmarkFrame& frame) {
  frame.validate();
  FeatureVector out;
  for (std::size_t i = 0; i < kLandmarkCount; ++i) {
    out[3 * i] = frame.points[i].x;
    out[3 * i + 1] = frame.points[i].y;
    out[3 * i + 2] = frame.points[i].z;
  }
  return out;
}

LandmarkFrame unflatten(const FeatureVector& v) {
  LandmarkFrame frame;
  frame.points.resize(kLandmarkCount);
  for (std::size_t i = 0; i < kLandmarkCount; ++i) {
    frame.points[i] = {v[3 * i], v[3 * i + 1], v[3 * i + 2]};
  }
  return frame;
}

ScalerParams fit_scaler(std::span<const FeatureVector> dataset) {
  if (dataset.empty()) throw std::invalid_argument("fit_scaler: empty dataset");
  ScalerParams params;
  const double n = static_cast<double>(dataset.size());
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    double sum = 0.0;
    for (const auto& v : dataset) sum += v[j];
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& v : dataset) {
      const double d = v[j] - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / n);
    params.mu[j] = mean;
    params.sigma[j] = sd > 0.0 ? sd : 1.0;
  }
  return params;
}

FeatureVector apply_scaler(const ScalerParams& params, const FeatureVector& v) {
  FeatureVector out;
  for (std::size_t j = 0; j < kFeatureCount; ++j) out[j] = (v[j] - params.mu[j]) / params.sigma[j];
  return out;
}

std::vector<std::uint8_t> serialize_scaler(const ScalerParams& params) {
  binio::Writer w;
  w.magic("SBSCALER");
  w.u32(1);
  w.u32(static_cast<std::uint32_t>(kFeatureCount));
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    w.f64(params.mu[i]);
    w.f64(params.sigma[i]);
  }
  return w.take();
}

ScalerParams deserialize_scaler(std::span<const std::uint8_t> bytes, const std::string& origin) {
  binio::Reader r(bytes, origin);
  r.expect_magic("SBSCALER");
  if (r.u32() != 1) r.fail("unsupported scaler version");
  if (r.u32() != kFeatureCount) r.fail("scaler feature count is not " + std::to_string(kFeatureCount));
  ScalerParams p;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    p.mu[i] = r.f64();
    p.sigma[i] = r.f64();
    if (!std::isfinite(p.mu[i]) || !(p.sigma[i] > 0.0)) r.fail("scaler column " + std::to_string(i) + " is invalid");
  }
  r.expect_end();
  return p;
}

void save_scaler(const ScalerParams& params, const std::filesystem::path& path) {
  binio::write_file(path, serialize_scaler(params));
}

ScalerParams load_scaler(const std::filesystem::path& path) {
  return deserialize_scaler(binio::read_file(path), path.string());
}

}  // namespace signbridge

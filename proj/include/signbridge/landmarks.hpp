#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace signbridge {

inline constexpr std::size_t kLandmarkCount = 42;
inline constexpr std::size_t kFeatureCount = 3 * kLandmarkCount;

struct Landmark {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

// One hand-tracking observation: 42 ordered points in normalized coordinates.
struct LandmarkFrame {
  std::vector<Landmark> points;
  std::optional<std::string> label;

  // Throws std::invalid_argument on a wrong point count or non-finite value.
  void validate() const;
};

// Flattened frame, 126 values laid out as x1,y1,z1,x2,...
class FeatureVector {
 public:
  FeatureVector() : values_{} {}
  explicit FeatureVector(std::span<const double> values);

  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  static constexpr std::size_t size() { return kFeatureCount; }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;

 private:
  std::array<double, kFeatureCount> values_;
};

struct ScalerParams {
  std::array<double, kFeatureCount> mu{};
  std::array<double, kFeatureCount> sigma{};
};

FeatureVector flatten(const LandmarkFrame& frame);
LandmarkFrame unflatten(const FeatureVector& v);

// Column means and population standard deviations. A zero-variance column gets
// sigma = 1 so it maps to 0 after centering.
ScalerParams fit_scaler(std::span<const FeatureVector> dataset);

FeatureVector apply_scaler(const ScalerParams& params, const FeatureVector& v);

std::vector<std::uint8_t> serialize_scaler(const ScalerParams& params);
ScalerParams deserialize_scaler(std::span<const std::uint8_t> bytes, const std::string& origin = "<memory>");
void save_scaler(const ScalerParams& params, const std::filesystem::path& path);
ScalerParams load_scaler(const std::filesystem::path& path);

}  // namespace signbridge

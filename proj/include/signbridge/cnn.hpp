#pragma once

// Small convolutional classifier for 32x32 single-channel silhouettes, with
// forward/backward passes, Adam training and a finite-difference checker.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "signbridge/image.hpp"
#include "signbridge/rng.hpp"

namespace signbridge::cnn {

struct Shape3 {
  int height = 0;
  int width = 0;
  int channels = 0;

  std::size_t size() const { return static_cast<std::size_t>(height) * width * channels; }
  friend bool operator==(const Shape3&, const Shape3&) = default;
};

std::string to_string(const Shape3& s);

// Height x width x channels, channel-fastest layout.
struct Tensor3 {
  Shape3 shape;
  std::vector<double> values;

  Tensor3() = default;
  explicit Tensor3(Shape3 s, double fill = 0.0) : shape(s), values(s.size(), fill) {}
  double& at(int y, int x, int c) {
    return values[(static_cast<std::size_t>(y) * shape.width + x) * shape.channels + c];
  }
  double at(int y, int x, int c) const {
    return values[(static_cast<std::size_t>(y) * shape.width + x) * shape.channels + c];
  }
};

// Pixels scaled to [0, 1].
Tensor3 to_tensor(const GrayImage& img);

enum class Padding { valid, same };
enum class Activation { none, relu };

struct Conv2DSpec {
  int filters = 1;
  int kernel = 1;
  Padding padding = Padding::valid;
  Activation activation = Activation::relu;
};

struct MaxPoolSpec {
  int pool = 2;
  int stride = 2;
  bool ceil_mode = false;  // keep a clipped trailing window
};

// Flattens its input.
struct DenseSpec {
  int units = 1;
  Activation activation = Activation::relu;
};

struct DropoutSpec {
  double rate = 0.0;
};

using LayerSpec = std::variant<Conv2DSpec, MaxPoolSpec, DenseSpec, DropoutSpec>;

struct LayerInfo {
  std::string kind;
  Shape3 output;
  std::size_t param_offset = 0;
  std::size_t param_count = 0;
};

using ClassProbabilities = std::vector<double>;

class Network {
 public:
  Network() = default;
  // The last layer must be a Dense layer with Activation::none; its output
  // feeds a softmax. Weights start at zero.
  Network(Shape3 input, std::vector<LayerSpec> layers);

  const Shape3& input_shape() const { return input_; }
  const std::vector<LayerSpec>& specs() const { return specs_; }
  const std::vector<LayerInfo>& layers() const { return info_; }
  std::size_t num_classes() const;
  std::size_t param_count() const { return params_.size(); }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  // Glorot-uniform weights, zero biases.
  void initialize(std::uint64_t seed);

  struct Workspace;
  // Softmax class probabilities. With a dropout RNG the dropout layers are
  // active (inverted scaling); without one they are the identity.
  ClassProbabilities forward(const Tensor3& input, Workspace* ws = nullptr, Rng* dropout_rng = nullptr) const;
  // Accumulates d(cross-entropy)/d(params) into grad for the pass recorded in ws.
  void backward(const Workspace& ws, int label, std::span<double> grad) const;

  std::vector<std::uint8_t> serialize() const;
  static Network deserialize(std::span<const std::uint8_t> bytes, const std::string& origin = "<memory>");
  void save(const std::filesystem::path& path) const;
  static Network load(const std::filesystem::path& path);

  struct Workspace {
    std::vector<std::vector<double>> activations;  // [0] = input, [i + 1] = output of layer i
    std::vector<std::vector<std::uint32_t>> argmax;
    std::vector<std::vector<double>> dropout_scale;
    ClassProbabilities probabilities;
  };

 private:
  Shape3 input_;
  std::vector<LayerSpec> specs_;
  std::vector<LayerInfo> info_;
  std::vector<double> params_;
};

// Conv(16, 2x2) -> MaxPool(2, 2) -> Conv(32, 3x3) -> MaxPool(3, 3) ->
// Conv(64, 5x5, same) -> MaxPool(5, 5, ceil) -> Dense(128) -> Dropout(0.2) ->
// Dense(num_classes), for 32x32x1 inputs.
Network build_model(int num_classes, std::uint64_t seed);

struct OneHotLabel {
  int index = 0;
  int num_classes = 0;
};

inline constexpr double kProbabilityFloor = 1e-12;

// -log(max(pred[label], 1e-12))
double cross_entropy(std::span<const double> pred, const OneHotLabel& label);

struct Sample {
  Tensor3 input;
  int label = 0;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 32;
  int max_epochs = 100;
  int patience = 5;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainResult {
  Network model;  // weights from the epoch with the lowest validation loss
  std::vector<EpochStats> history;
  int best_epoch = 0;
};

// Mini-batch Adam on mean cross-entropy with early stopping on validation loss.
TrainResult train(const Network& initial, std::span<const Sample> train_set, std::span<const Sample> val_set,
                  const TrainConfig& config);

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};

Evaluation evaluate(const Network& model, std::span<const Sample> data);

int argmax(std::span<const double> p);

// Largest relative difference between backprop and central finite
// differences of the loss (dropout off). When max_params is set, an evenly
// spaced subset of that many parameters is checked.
double gradient_check(const Network& model, const Tensor3& input, int label, double step = 1e-4,
                      std::optional<std::size_t> max_params = std::nullopt);

}  // namespace signbridge::cnn

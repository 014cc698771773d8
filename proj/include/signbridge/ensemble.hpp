#pragma once

#include <span>
#include <string>
#include <vector>

#include "signbridge/labels.hpp"

namespace signbridge {

// Distribution over the 29-class shared label space (labels::shared_space()).
class ClassProbabilities {
 public:
  ClassProbabilities() : p_(labels::kSharedClassCount, 0.0) {}
  // Throws std::invalid_argument unless there are 29 entries, all >= 0, summing to 1 within 1e-9.
  explicit ClassProbabilities(std::vector<double> p);

  // Spreads a model's distribution over its own class names into the shared
  // space; classes the model lacks get 0. Unknown names throw std::invalid_argument.
  static ClassProbabilities from_model(std::span<const std::string> model_classes, std::span<const double> p);

  std::span<const double> values() const { return p_; }
  double operator[](std::size_t i) const { return p_[i]; }
  std::size_t argmax() const;  // lowest index on ties

 private:
  std::vector<double> p_;
};

struct EnsembleWeights {
  double w_rfc = 0.5;
  double w_cnn = 0.5;

  static EnsembleWeights from_rfc(double w_rfc);
  void validate() const;
};

ClassProbabilities combine(const ClassProbabilities& p_rfc, const ClassProbabilities& p_cnn, const EnsembleWeights& w);

struct ValidationPair {
  ClassProbabilities p_rfc;
  ClassProbabilities p_cnn;
  std::size_t true_class = 0;
};

struct WeightSearchRow {
  double w_rfc = 0.0;
  double accuracy = 0.0;
};

struct WeightSearchResult {
  EnsembleWeights weights;
  double accuracy = 0.0;
  std::vector<WeightSearchRow> table;  // w_rfc ascending
};

double ensemble_accuracy(std::span<const ValidationPair> pairs, const EnsembleWeights& w);

// w_rfc over {0, 0.05, ..., 1}, maximizing top-1 accuracy; larger w_rfc wins ties.
WeightSearchResult optimize_weights(std::span<const ValidationPair> pairs);

struct StreamDecodeConfig {
  int debounce = 3;
};

// Turns per-frame class indices (shared space) into text. A class is emitted
// once it has been seen on `debounce` consecutive frames. A letter equal to
// the previous emission is suppressed until some other class (BLANK included)
// stabilizes in between.
std::string decode_stream(std::span<const std::size_t> frames, const StreamDecodeConfig& cfg);

}  // namespace signbridge

#include "signbridge/ensemble.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>

namespace signbridge {

ClassProbabilities::ClassProbabilities(std::vector<double> p) : p_(std::move(p)) {
  if (p_.size() != labels::kSharedClassCount) {
    throw std::invalid_argument("class distribution must have " + std::to_string(labels::kSharedClassCount) +
                                " entries, got " + std::to_string(p_.size()));
  }
  double sum = 0.0;
  for (double v : p_) {
    if (!(v >= 0.0)) throw std::invalid_argument("class probabilities must be >= 0");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("class probabilities must sum to 1");
}

ClassProbabilities ClassProbabilities::from_model(std::span<const std::string> model_classes,
                                                  std::span<const double> p) {
  if (model_classes.size() != p.size()) throw std::invalid_argument("class list and distribution differ in length");
  std::vector<double> out(labels::kSharedClassCount, 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto idx = labels::shared_index(model_classes[i]);
    if (!idx) throw std::invalid_argument("class '" + model_classes[i] + "' is not in the shared label space");
    out[*idx] += p[i];
  }
  return ClassProbabilities(std::move(out));
}

std::size_t ClassProbabilities::argmax() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < p_.size(); ++i) {
    if (p_[i] > p_[best]) best = i;
  }
  return best;
}

EnsembleWeights EnsembleWeights::from_rfc(double w_rfc) {
  EnsembleWeights w{w_rfc, 1.0 - w_rfc};
  w.validate();
  return w;
}

void EnsembleWeights::validate() const {
  if (!(w_rfc >= 0.0) || !(w_cnn >= 0.0)) throw std::invalid_argument("ensemble weights must be >= 0");
  if (std::abs(w_rfc + w_cnn - 1.0) > 1e-9) throw std::invalid_argument("ensemble weights must sum to 1");
}

ClassProbabilities combine(const ClassProbabilities& p_rfc, const ClassProbabilities& p_cnn, const EnsembleWeights& w) {
  w.validate();
  std::vector<double> out(labels::kSharedClassCount);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = w.w_rfc * p_rfc[i] + w.w_cnn * p_cnn[i];
  return ClassProbabilities(std::move(out));
}

double ensemble_accuracy(std::span<const ValidationPair> pairs, const EnsembleWeights& w) {
  if (pairs.empty()) throw std::invalid_argument("ensemble_accuracy: empty validation set");
  std::size_t correct = 0;
  for (const auto& v : pairs) correct += combine(v.p_rfc, v.p_cnn, w).argmax() == v.true_class;
  return double(correct) / double(pairs.size());
}

WeightSearchResult optimize_weights(std::span<const ValidationPair> pairs) {
  if (pairs.empty()) throw std::invalid_argument("optimize_weights: empty validation set");
  WeightSearchResult result;
  // Scan from w_rfc = 1 down so that ">=" never replaces an earlier (larger) weight.
  bool first = true;
  for (int step = 20; step >= 0; --step) {
    const double w_rfc = step / 20.0;
    const auto w = EnsembleWeights::from_rfc(w_rfc);
    const double acc = ensemble_accuracy(pairs, w);
    result.table.insert(result.table.begin(), {w_rfc, acc});
    if (first || acc > result.accuracy) {
      result.weights = w;
      result.accuracy = acc;
      first = false;
    }
  }
  return result;
}

std::string decode_stream(std::span<const std::size_t> frames, const StreamDecodeConfig& cfg) {
  if (cfg.debounce < 1) throw std::invalid_argument("debounce must be >= 1");
  std::string text;
  std::optional<std::size_t> run_class;
  int run_length = 0;
  std::optional<std::size_t> last_stable;
  for (std::size_t cls : frames) {
    if (cls >= labels::kSharedClassCount) throw std::invalid_argument("frame class outside the shared label space");
    if (run_class == cls) {
      ++run_length;
    } else {
      run_class = cls;
      run_length = 1;
    }
    if (run_length != cfg.debounce) continue;

    if (cls < 26) {
      if (last_stable != cls) text.push_back(static_cast<char>('A' + cls));
    } else if (cls == labels::kSpaceIndex) {
      text.push_back(' ');
    } else if (cls == labels::kDeleteIndex) {
      if (!text.empty()) text.pop_back();
    }
    last_stable = cls;
  }
  return text;
}

}  // namespace signbridge

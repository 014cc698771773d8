#pragma once

#include <cstdint>
#include <json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace signbridge::pipeline {

// Row = true class, column = predicted class.
struct ConfusionMatrix {
  std::vector<std::string> classes;
  std::vector<std::uint64_t> counts;

  std::uint64_t at(std::size_t truth, std::size_t pred) const { return counts[truth * classes.size() + pred]; }
  std::uint64_t row_sum(std::size_t truth) const;
  std::uint64_t col_sum(std::size_t pred) const;
};

struct EvalReport {
  double accuracy = 0.0;
  std::vector<double> precision;  // 0 for a class never predicted
  std::vector<double> recall;     // 0 for a class with no samples
  ConfusionMatrix matrix;
  std::optional<double> runtime_seconds;

  nlohmann::json to_json() const;
};

// Integer labels index `classes`. Throws std::invalid_argument on a length
// mismatch, empty input or an out-of-range label.
EvalReport confusion_and_metrics(std::span<const int> preds, std::span<const int> labels,
                                 std::vector<std::string> classes);

// String labels. Classes are ordered by the shared label space first, then
// alphabetically for any other names.
EvalReport confusion_and_metrics(std::span<const std::string> preds, std::span<const std::string> labels);

}  // namespace signbridge::pipeline

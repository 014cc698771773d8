#include "signbridge/pipeline/metrics.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "signbridge/labels.hpp"

namespace signbridge::pipeline {

std::uint64_t ConfusionMatrix::row_sum(std::size_t truth) const {
  std::uint64_t s = 0;
  for (std::size_t p = 0; p < classes.size(); ++p) s += at(truth, p);
  return s;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t pred) const {
  std::uint64_t s = 0;
  for (std::size_t t = 0; t < classes.size(); ++t) s += at(t, pred);
  return s;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json per_class = nlohmann::json::array();
  for (std::size_t c = 0; c < matrix.classes.size(); ++c) {
    per_class.push_back({{"class", matrix.classes[c]},
                         {"precision", precision[c]},
                         {"recall", recall[c]},
                         {"support", matrix.row_sum(c)}});
  }
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t t = 0; t < matrix.classes.size(); ++t) {
    rows.push_back(std::vector<std::uint64_t>(matrix.counts.begin() + t * matrix.classes.size(),
                                              matrix.counts.begin() + (t + 1) * matrix.classes.size()));
  }
  nlohmann::json j = {
      {"accuracy", accuracy},
      {"per_class", per_class},
      {"confusion_matrix", {{"classes", matrix.classes}, {"rows", rows}}},
  };
  if (runtime_seconds) j["runtime_seconds"] = *runtime_seconds;
  return j;
}

EvalReport confusion_and_metrics(std::span<const int> preds, std::span<const int> labels,
                                 std::vector<std::string> classes) {
  if (preds.size() != labels.size())
    throw std::invalid_argument("predictions and labels differ in length (" + std::to_string(preds.size()) +
                                " vs " + std::to_string(labels.size()) + ")");
  if (preds.empty()) throw std::invalid_argument("confusion_and_metrics: no samples");
  const std::size_t c = classes.size();
  EvalReport r;
  r.matrix.classes = std::move(classes);
  r.matrix.counts.assign(c * c, 0);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] < 0 || std::size_t(preds[i]) >= c || labels[i] < 0 || std::size_t(labels[i]) >= c)
      throw std::invalid_argument("label index out of range at sample " + std::to_string(i));
    ++r.matrix.counts[std::size_t(labels[i]) * c + std::size_t(preds[i])];
  }
  std::uint64_t trace = 0;
  r.precision.assign(c, 0.0);
  r.recall.assign(c, 0.0);
  for (std::size_t k = 0; k < c; ++k) {
    const std::uint64_t diag = r.matrix.at(k, k);
    trace += diag;
    if (const auto row = r.matrix.row_sum(k)) r.recall[k] = double(diag) / double(row);
    if (const auto col = r.matrix.col_sum(k)) r.precision[k] = double(diag) / double(col);
  }
  r.accuracy = double(trace) / double(preds.size());
  return r;
}

EvalReport confusion_and_metrics(std::span<const std::string> preds, std::span<const std::string> labels) {
  if (preds.size() != labels.size())
    throw std::invalid_argument("predictions and labels differ in length (" + std::to_string(preds.size()) +
                                " vs " + std::to_string(labels.size()) + ")");
  std::vector<std::string> names;
  for (const auto* list : {&preds, &labels})
    for (const auto& s : *list)
      if (std::find(names.begin(), names.end(), s) == names.end()) names.push_back(s);
  std::sort(names.begin(), names.end(), [](const std::string& a, const std::string& b) {
    const auto ia = labels::shared_index(a), ib = labels::shared_index(b);
    if (ia && ib) return *ia < *ib;
    if (ia || ib) return bool(ia);
    return a < b;
  });
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < names.size(); ++i) index[names[i]] = int(i);
  std::vector<int> p, l;
  for (const auto& s : preds) p.push_back(index.at(s));
  for (const auto& s : labels) l.push_back(index.at(s));
  return confusion_and_metrics(p, l, std::move(names));
}

}  // namespace signbridge::pipeline

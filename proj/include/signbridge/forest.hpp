#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace signbridge {

// Row-major feature matrix with integer class labels indexing `classes`.
struct TrainingSet {
  std::size_t n_features = 0;
  std::vector<double> x;
  std::vector<int> y;
  std::vector<std::string> classes;

  std::size_t size() const { return y.size(); }
  std::span<const double> row(std::size_t i) const { return {x.data() + i * n_features, n_features}; }
  void add(std::span<const double> features, int label);
  TrainingSet subset(std::span<const std::size_t> rows) const;
};

struct ForestHyperparams {
  int n_estimators = 100;
  std::optional<int> max_depth;  // unbounded when empty
  int min_samples_split = 2;
  int min_samples_leaf = 1;
  bool bootstrap = true;
  std::optional<int> max_features;  // ceil(sqrt(d)) when empty

  void validate() const;
  std::string describe() const;
  friend bool operator==(const ForestHyperparams&, const ForestHyperparams&) = default;
};

// Best values reported for the landmark classifier.
ForestHyperparams table_best_hyperparams();

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // go left when x[feature] <= threshold
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::int32_t leaf_class = -1;
  std::int32_t counts_offset = -1;  // leaf: start of its class histogram in Tree::counts
  std::uint32_t samples = 0;
  std::uint32_t depth = 0;

  bool is_leaf() const { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::vector<std::uint32_t> counts;

  int predict(std::span<const double> x) const;
  std::span<const std::uint32_t> leaf_histogram(const TreeNode& leaf, std::size_t n_classes) const;
  friend bool operator==(const Tree&, const Tree&) = default;
};

class ForestModel {
 public:
  ForestModel() = default;
  ForestModel(std::vector<std::string> classes, std::size_t n_features, ForestHyperparams params,
              std::vector<Tree> trees);

  const std::vector<std::string>& classes() const { return classes_; }
  std::size_t n_features() const { return n_features_; }
  const ForestHyperparams& hyperparams() const { return params_; }
  const std::vector<Tree>& trees() const { return trees_; }

  // Per-tree class votes.
  std::vector<std::uint32_t> votes(std::span<const double> x) const;
  // Mode of the tree votes; lowest class index wins ties.
  int predict_class(std::span<const double> x) const;
  // Fraction of trees voting for each class.
  std::vector<double> predict_proba(std::span<const double> x) const;

  std::vector<std::uint8_t> serialize() const;
  static ForestModel deserialize(std::span<const std::uint8_t> bytes, const std::string& origin = "<memory>");
  void save(const std::filesystem::path& path) const;
  static ForestModel load(const std::filesystem::path& path);

  friend bool operator==(const ForestModel&, const ForestModel&) = default;

 private:
  std::vector<std::string> classes_;
  std::size_t n_features_ = 0;
  ForestHyperparams params_;
  std::vector<Tree> trees_;
};

// Mode of a vote histogram, lowest index on ties.
int mode_of_votes(std::span<const std::uint32_t> votes);

// CART trees with Gini splits over random feature subsets. Tree t draws from
// its own RNG stream keyed by (seed, t), so any thread count gives the same
// model.
ForestModel train_forest(const TrainingSet& data, const ForestHyperparams& params,
                         std::uint64_t seed, unsigned threads = 1);

struct SearchSpace {
  std::vector<int> n_estimators{100, 200, 300};
  std::vector<std::optional<int>> max_depth{std::nullopt, 10, 20, 30};
  std::vector<int> min_samples_split{2, 5, 10};
  std::vector<int> min_samples_leaf{1, 2, 4};
  std::vector<bool> bootstrap{true, false};

  // Cross product, n_estimators outermost and bootstrap innermost.
  std::vector<ForestHyperparams> enumerate() const;
};

struct CvRow {
  ForestHyperparams params;
  double accuracy = 0.0;
};

struct GridSearchResult {
  ForestHyperparams best;
  double best_accuracy = 0.0;
  std::vector<CvRow> table;
};

// Exhaustive k-fold cross-validated accuracy; the earliest configuration wins ties.
GridSearchResult grid_search(const TrainingSet& data, const SearchSpace& space, int folds,
                             std::uint64_t seed, unsigned threads = 1);

}  // namespace signbridge

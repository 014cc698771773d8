#include "signbridge/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <exception>
#include <mutex>
#include <thread>

#include "signbridge/binary_io.hpp"
#include "signbridge/parallel.hpp"
#include "signbridge/rng.hpp"

namespace signbridge {

void TrainingSet::add(std::span<const double> features, int label) {
  if (n_features == 0 && y.empty()) n_features = features.size();
  if (features.size() != n_features) throw std::invalid_argument("TrainingSet: inconsistent feature count");
  x.insert(x.end(), features.begin(), features.end());
  y.push_back(label);
}

TrainingSet TrainingSet::subset(std::span<const std::size_t> rows) const {
  TrainingSet out;
  out.n_features = n_features;
  out.classes = classes;
  out.x.reserve(rows.size() * n_features);
  for (std::size_t r : rows) {
    auto v = row(r);
    out.x.insert(out.x.end(), v.begin(), v.end());
    out.y.push_back(y[r]);
  }
  return out;
}

void ForestHyperparams::validate() const {
  if (n_estimators < 1) throw std::invalid_argument("n_estimators must be >= 1");
  if (max_depth && *max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");
  if (min_samples_split < 2) throw std::invalid_argument("min_samples_split must be >= 2");
  if (min_samples_leaf < 1) throw std::invalid_argument("min_samples_leaf must be >= 1");
  if (max_features && *max_features < 1) throw std::invalid_argument("max_features must be >= 1");
}

std::string ForestHyperparams::describe() const {
  std::ostringstream os;
  os << "n_estimators=" << n_estimators << " max_depth=" << (max_depth ? std::to_string(*max_depth) : "None")
     << " min_samples_split=" << min_samples_split << " min_samples_leaf=" << min_samples_leaf
     << " bootstrap=" << (bootstrap ? "true" : "false");
  return os.str();
}

ForestHyperparams table_best_hyperparams() {
  ForestHyperparams p;
  p.n_estimators = 200;
  p.max_depth = 20;
  p.min_samples_split = 5;
  p.min_samples_leaf = 2;
  p.bootstrap = true;
  return p;
}

int mode_of_votes(std::span<const std::uint32_t> votes) {
  int best = 0;
  for (std::size_t c = 1; c < votes.size(); ++c) {
    if (votes[c] > votes[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
  }
  return best;
}

int Tree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const TreeNode& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes[i].leaf_class;
}

std::span<const std::uint32_t> Tree::leaf_histogram(const TreeNode& leaf, std::size_t n_classes) const {
  return {counts.data() + leaf.counts_offset, n_classes};
}

namespace {

struct Split {
  std::int32_t feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;  // weighted child Gini
};

class TreeBuilder {
 public:
  TreeBuilder(const TrainingSet& data, const ForestHyperparams& params, std::size_t max_features, Rng rng)
      : data_(data), params_(params), max_features_(max_features), rng_(std::move(rng)),
        n_classes_(data.classes.size()) {}

  Tree build(std::vector<std::size_t> samples) {
    samples_ = std::move(samples);
    feature_order_.resize(data_.n_features);
    std::iota(feature_order_.begin(), feature_order_.end(), 0);
    Tree tree;
    struct Pending {
      std::size_t begin, end, node;
      std::uint32_t depth;
    };
    tree.nodes.emplace_back();
    std::vector<Pending> stack{{0, samples_.size(), 0, 0}};
    std::vector<std::uint32_t> hist(n_classes_);
    while (!stack.empty()) {
      const Pending p = stack.back();
      stack.pop_back();
      std::fill(hist.begin(), hist.end(), 0);
      for (std::size_t i = p.begin; i < p.end; ++i) ++hist[static_cast<std::size_t>(data_.y[samples_[i]])];
      const std::size_t n = p.end - p.begin;
      tree.nodes[p.node].samples = static_cast<std::uint32_t>(n);
      tree.nodes[p.node].depth = p.depth;

      const bool pure = std::count_if(hist.begin(), hist.end(), [](std::uint32_t c) { return c > 0; }) <= 1;
      const bool depth_capped = params_.max_depth && p.depth >= static_cast<std::uint32_t>(*params_.max_depth);
      std::optional<Split> split;
      if (!pure && !depth_capped && n >= static_cast<std::size_t>(params_.min_samples_split) &&
          n >= 2 * static_cast<std::size_t>(params_.min_samples_leaf)) {
        split = best_split(p.begin, p.end, hist);
      }
      if (!split) {
        TreeNode& leaf = tree.nodes[p.node];
        leaf.feature = -1;
        leaf.counts_offset = static_cast<std::int32_t>(tree.counts.size());
        tree.counts.insert(tree.counts.end(), hist.begin(), hist.end());
        leaf.leaf_class = mode_of_votes(hist);
        continue;
      }
      const auto mid_it = std::partition(
          samples_.begin() + static_cast<std::ptrdiff_t>(p.begin), samples_.begin() + static_cast<std::ptrdiff_t>(p.end),
          [&](std::size_t s) { return data_.row(s)[static_cast<std::size_t>(split->feature)] <= split->threshold; });
      const std::size_t mid = static_cast<std::size_t>(mid_it - samples_.begin());
      const auto left = static_cast<std::int32_t>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      TreeNode& node = tree.nodes[p.node];
      node.feature = split->feature;
      node.threshold = split->threshold;
      node.left = left;
      node.right = left + 1;
      // right pushed first so the left subtree is expanded first
      stack.push_back({mid, p.end, static_cast<std::size_t>(left + 1), p.depth + 1});
      stack.push_back({p.begin, mid, static_cast<std::size_t>(left), p.depth + 1});
    }
    return tree;
  }

 private:
  // Visits features in a fresh random order until max_features of them were
  // non-constant on this node (or all were tried).
  std::optional<Split> best_split(std::size_t begin, std::size_t end, const std::vector<std::uint32_t>& parent) {
    const std::size_t n = end - begin;
    const std::size_t min_leaf = static_cast<std::size_t>(params_.min_samples_leaf);
    std::optional<Split> best;
    std::size_t informative = 0;
    std::vector<std::uint32_t> left(n_classes_), right(n_classes_);
    values_.resize(n);
    for (std::size_t k = 0; k < feature_order_.size() && informative < max_features_; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, feature_order_.size() - 1);
      std::swap(feature_order_[k], feature_order_[pick(rng_)]);
      const std::size_t f = feature_order_[k];
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t s = samples_[begin + i];
        values_[i] = {data_.row(s)[f], data_.y[s]};
      }
      std::sort(values_.begin(), values_.end());
      if (values_.front().first == values_.back().first) continue;
      ++informative;

      std::fill(left.begin(), left.end(), 0);
      right = parent;
      double left_sq = 0.0;
      double right_sq = 0.0;
      for (std::uint32_t c : right) right_sq += double(c) * double(c);
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const auto c = static_cast<std::size_t>(values_[i].second);
        left_sq += 2.0 * left[c] + 1.0;
        ++left[c];
        right_sq -= 2.0 * right[c] - 1.0;
        --right[c];
        if (values_[i].first == values_[i + 1].first) continue;
        const std::size_t nl = i + 1, nr = n - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        // n * weighted Gini = (nl - sum_l^2 / nl) + (nr - sum_r^2 / nr)
        const double impurity = ((double(nl) - left_sq / double(nl)) + (double(nr) - right_sq / double(nr))) / double(n);
        if (!best || impurity < best->impurity) {
          double threshold = 0.5 * (values_[i].first + values_[i + 1].first);
          if (threshold >= values_[i + 1].first) threshold = values_[i].first;
          best = Split{static_cast<std::int32_t>(f), threshold, impurity};
        }
      }
    }
    return best;
  }

  const TrainingSet& data_;
  const ForestHyperparams& params_;
  std::size_t max_features_;
  Rng rng_;
  std::size_t n_classes_;
  std::vector<std::size_t> samples_;
  std::vector<std::size_t> feature_order_;
  std::vector<std::pair<double, int>> values_;
};

}  // namespace

ForestModel::ForestModel(std::vector<std::string> classes, std::size_t n_features, ForestHyperparams params,
                         std::vector<Tree> trees)
    : classes_(std::move(classes)), n_features_(n_features), params_(params), trees_(std::move(trees)) {}

std::vector<std::uint32_t> ForestModel::votes(std::span<const double> x) const {
  if (x.size() != n_features_) throw std::invalid_argument("forest: feature count mismatch");
  std::vector<std::uint32_t> v(classes_.size(), 0);
  for (const Tree& t : trees_) ++v[static_cast<std::size_t>(t.predict(x))];
  return v;
}

int ForestModel::predict_class(std::span<const double> x) const { return mode_of_votes(votes(x)); }

std::vector<double> ForestModel::predict_proba(std::span<const double> x) const {
  const auto v = votes(x);
  std::vector<double> p(v.size());
  for (std::size_t c = 0; c < v.size(); ++c) p[c] = double(v[c]) / double(trees_.size());
  return p;
}

ForestModel train_forest(const TrainingSet& data, const ForestHyperparams& params, std::uint64_t seed,
                         unsigned threads) {
  params.validate();
  if (data.size() == 0) throw std::invalid_argument("train_forest: empty training set");
  if (data.size() < static_cast<std::size_t>(params.min_samples_split)) {
    throw std::invalid_argument("train_forest: fewer samples than min_samples_split");
  }
  if (data.n_features == 0) throw std::invalid_argument("train_forest: no features");
  std::vector<bool> seen(data.classes.size(), false);
  std::size_t distinct = 0;
  for (int label : data.y) {
    if (label < 0 || static_cast<std::size_t>(label) >= data.classes.size()) {
      throw std::invalid_argument("train_forest: label outside class list");
    }
    if (!seen[static_cast<std::size_t>(label)]) {
      seen[static_cast<std::size_t>(label)] = true;
      ++distinct;
    }
  }
  if (distinct < 2) throw std::invalid_argument("train_forest: need at least two classes");

  const std::size_t max_features = params.max_features
      ? std::min<std::size_t>(static_cast<std::size_t>(*params.max_features), data.n_features)
      : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(data.n_features))));

  std::vector<Tree> trees(static_cast<std::size_t>(params.n_estimators));
  parallel_for(trees.size(), threads, [&](std::size_t t) {
    Rng rng = make_rng(seed, "forest-tree", t);
    std::vector<std::size_t> samples(data.size());
    if (params.bootstrap) {
      std::uniform_int_distribution<std::size_t> draw(0, data.size() - 1);
      for (auto& s : samples) s = draw(rng);
    } else {
      std::iota(samples.begin(), samples.end(), 0);
    }
    TreeBuilder builder(data, params, max_features, std::move(rng));
    trees[t] = builder.build(std::move(samples));
  });
  return ForestModel(data.classes, data.n_features, params, std::move(trees));
}

std::vector<ForestHyperparams> SearchSpace::enumerate() const {
  std::vector<ForestHyperparams> out;
  for (int ne : n_estimators)
    for (const auto& md : max_depth)
      for (int mss : min_samples_split)
        for (int msl : min_samples_leaf)
          for (bool bs : bootstrap) {
            ForestHyperparams p;
            p.n_estimators = ne;
            p.max_depth = md;
            p.min_samples_split = mss;
            p.min_samples_leaf = msl;
            p.bootstrap = bs;
            out.push_back(p);
          }
  return out;
}

GridSearchResult grid_search(const TrainingSet& data, const SearchSpace& space, int folds, std::uint64_t seed,
                             unsigned threads) {
  if (folds < 2) throw std::invalid_argument("grid_search: need at least 2 folds");
  if (data.size() < static_cast<std::size_t>(folds)) throw std::invalid_argument("grid_search: fewer samples than folds");
  const auto configs = space.enumerate();
  if (configs.empty()) throw std::invalid_argument("grid_search: empty search space");

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng = make_rng(seed, "cv-folds");
  std::shuffle(order.begin(), order.end(), rng);

  struct Fold {
    TrainingSet train;
    std::vector<std::size_t> test;
  };
  std::vector<Fold> split(static_cast<std::size_t>(folds));
  for (std::size_t f = 0; f < split.size(); ++f) {
    const std::size_t lo = f * data.size() / split.size();
    const std::size_t hi = (f + 1) * data.size() / split.size();
    std::vector<std::size_t> train_rows;
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (i >= lo && i < hi) split[f].test.push_back(order[i]);
      else train_rows.push_back(order[i]);
    }
    split[f].train = data.subset(train_rows);
  }

  GridSearchResult result;
  for (const auto& params : configs) {
    std::size_t correct = 0;
    for (std::size_t f = 0; f < split.size(); ++f) {
      const ForestModel model = train_forest(split[f].train, params, derive_seed(seed, "cv-train", f), threads);
      for (std::size_t r : split[f].test) correct += model.predict_class(data.row(r)) == data.y[r];
    }
    const double acc = double(correct) / double(data.size());
    result.table.push_back({params, acc});
    if (result.table.size() == 1 || acc > result.best_accuracy) {
      result.best = params;
      result.best_accuracy = acc;
    }
  }
  return result;
}

namespace {
constexpr std::string_view kForestMagic = "SBFOREST";
constexpr std::uint32_t kForestVersion = 1;
}  // namespace

// Layout (little-endian): magic, version, n_features, class names, hyperparams,
// then per tree its node array and leaf histograms. Thresholds are raw f64 bits.
std::vector<std::uint8_t> ForestModel::serialize() const {
  binio::Writer w;
  w.magic(kForestMagic);
  w.u32(kForestVersion);
  w.u32(static_cast<std::uint32_t>(n_features_));
  w.u32(static_cast<std::uint32_t>(classes_.size()));
  for (const auto& c : classes_) w.str(c);
  w.u32(static_cast<std::uint32_t>(params_.n_estimators));
  w.i32(params_.max_depth ? *params_.max_depth : -1);
  w.u32(static_cast<std::uint32_t>(params_.min_samples_split));
  w.u32(static_cast<std::uint32_t>(params_.min_samples_leaf));
  w.u8(params_.bootstrap ? 1 : 0);
  w.i32(params_.max_features ? *params_.max_features : -1);
  w.u32(static_cast<std::uint32_t>(trees_.size()));
  for (const Tree& t : trees_) {
    w.u32(static_cast<std::uint32_t>(t.nodes.size()));
    for (const TreeNode& n : t.nodes) {
      w.i32(n.feature);
      w.f64(n.threshold);
      w.i32(n.left);
      w.i32(n.right);
      w.i32(n.leaf_class);
      w.i32(n.counts_offset);
      w.u32(n.samples);
      w.u32(n.depth);
    }
    w.u32(static_cast<std::uint32_t>(t.counts.size()));
    for (std::uint32_t c : t.counts) w.u32(c);
  }
  return w.take();
}

ForestModel ForestModel::deserialize(std::span<const std::uint8_t> bytes, const std::string& origin) {
  binio::Reader r(bytes, origin);
  r.expect_magic(kForestMagic);
  if (const auto v = r.u32(); v != kForestVersion) r.fail("unsupported forest format version " + std::to_string(v));
  const std::size_t n_features = r.u32();
  std::vector<std::string> classes(r.u32());
  for (auto& c : classes) c = r.str();
  ForestHyperparams p;
  p.n_estimators = static_cast<int>(r.u32());
  if (const auto md = r.i32(); md >= 0) p.max_depth = md;
  p.min_samples_split = static_cast<int>(r.u32());
  p.min_samples_leaf = static_cast<int>(r.u32());
  p.bootstrap = r.u8() != 0;
  if (const auto mf = r.i32(); mf >= 0) p.max_features = mf;
  std::vector<Tree> trees(r.u32());
  for (Tree& t : trees) {
    t.nodes.resize(r.u32());
    for (TreeNode& n : t.nodes) {
      n.feature = r.i32();
      n.threshold = r.f64();
      n.left = r.i32();
      n.right = r.i32();
      n.leaf_class = r.i32();
      n.counts_offset = r.i32();
      n.samples = r.u32();
      n.depth = r.u32();
    }
    t.counts.resize(r.u32());
    for (auto& c : t.counts) c = r.u32();
    // structural checks so a corrupt file cannot index out of range
    for (const TreeNode& n : t.nodes) {
      if (n.is_leaf()) {
        if (n.leaf_class < 0 || static_cast<std::size_t>(n.leaf_class) >= classes.size() || n.counts_offset < 0 ||
            static_cast<std::size_t>(n.counts_offset) + classes.size() > t.counts.size()) {
          r.fail("corrupt leaf node");
        }
      } else if (static_cast<std::size_t>(n.feature) >= n_features || n.left <= 0 || n.right <= 0 ||
                 static_cast<std::size_t>(n.left) >= t.nodes.size() || static_cast<std::size_t>(n.right) >= t.nodes.size()) {
        r.fail("corrupt internal node");
      }
    }
    if (t.nodes.empty()) r.fail("empty tree");
  }
  r.expect_end();
  return ForestModel(std::move(classes), n_features, p, std::move(trees));
}

void ForestModel::save(const std::filesystem::path& path) const { binio::write_file(path, serialize()); }

ForestModel ForestModel::load(const std::filesystem::path& path) {
  return deserialize(binio::read_file(path), path.string());
}

}  // namespace signbridge
